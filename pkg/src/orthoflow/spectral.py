"""Fourier-space representation of periodic fields on the 3-torus.

Conventions
-----------
Domain is [0, 2*pi)^3 with integer wavevectors k, fields expanded as
f(x) = sum_k fhat(k) exp(i k.x).  All norms use the normalized (mean)
measure, so Parseval reads ||f||_L2^2 = sum_k |fhat(k)|^2.

Coefficients are stored in numpy FFT layout, shape (n1, n2, n3) per
scalar, axis-major (k1 slowest).  The Nyquist plane (index n/2 per axis)
is excluded from representable content and kept identically zero, so
derivative multipliers are unambiguous on real data.
"""

import os

import numpy as np
import scipy.fft as sfft

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mem_cap_bytes():
    """Memory cap for grid allocations, from ORTHOFLOW_MEM_CAP_MB (default 4096)."""
    return int(os.environ.get("ORTHOFLOW_MEM_CAP_MB", "4096")) * 1024 * 1024


def fft_workers():
    return int(os.environ.get("ORTHOFLOW_FFT_WORKERS", "1"))


class FourierGrid:
    """Discretization of T^3: integer wavevector indexing plus transforms.

    Each dim must be even and >= 4.  Representable modes per axis are
    -dims/2+1 .. dims/2-1; the Nyquist row is forced to zero.
    """

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3:
            raise ValueError("dims must have three entries")
        for ax, d in enumerate(dims):
            if d % 2 != 0:
                raise ValueError(f"axis {ax} odd: dims must be even, got {d}")
            if d < 4:
                raise ValueError(f"axis {ax} too small: dims must be >= 4, got {d}")
        need = 16 * dims[0] * dims[1] * dims[2]
        if need > mem_cap_bytes():
            raise ValueError(
                f"axis sizes {dims} exceed memory cap "
                f"({need} > {mem_cap_bytes()} bytes); raise ORTHOFLOW_MEM_CAP_MB"
            )
        self.dims = dims
        self.size = dims[0] * dims[1] * dims[2]
        self.max_mode = tuple(d // 2 - 1 for d in dims)
        # integer wavevectors in FFT layout, one 1d array per axis
        self.k_axis = tuple(
            np.fft.fftfreq(d, 1.0 / d).astype(np.int64) for d in dims
        )
        self.k1 = self.k_axis[0][:, None, None]
        self.k2 = self.k_axis[1][None, :, None]
        self.k3 = self.k_axis[2][None, None, :]
        self.k_sq = (self.k1 ** 2 + self.k2 ** 2 + self.k3 ** 2).astype(np.float64)
        self.dealias_cutoff = tuple(d // 3 for d in dims)
        self._halfn = dims[2] // 2 + 1
        # index maps used to rebuild the redundant half of an r2c spectrum
        self._flip1 = (-np.arange(dims[0])) % dims[0]
        self._flip2 = (-np.arange(dims[1])) % dims[1]

    def __eq__(self, other):
        return isinstance(other, FourierGrid) and self.dims == other.dims

    def __repr__(self):
        return f"FourierGrid(dims={self.dims})"

    def zeros(self):
        return np.zeros(self.dims, dtype=np.complex128)

    def mode_index(self, k):
        """Storage index of integer wavevector k = (k1, k2, k3)."""
        idx = []
        for ax, (ki, d) in enumerate(zip(k, self.dims)):
            ki = int(ki)
            if abs(ki) > self.max_mode[ax]:
                raise ValueError(
                    f"mode {k} not representable: |k{ax+1}|={abs(ki)} exceeds "
                    f"max mode {self.max_mode[ax]} on axis {ax}"
                )
            idx.append(ki % d)
        return tuple(idx)

    # -- transforms -------------------------------------------------------

    def to_physical(self, coeffs, oversample=1):
        """Real samples of sum_k c(k) exp(i k.x) on the (oversampled) uniform grid.

        Relies on the Hermitian symmetry of ``coeffs``; the inverse
        transform is taken over the half spectrum so output is exactly real.
        """
        oversample = int(oversample)
        if oversample < 1:
            raise ValueError("oversample must be >= 1")
        dims = tuple(oversample * d for d in self.dims)
        need = 8 * dims[0] * dims[1] * dims[2] * 3
        if need > mem_cap_bytes():
            raise ValueError(
                f"physical evaluation at oversample {oversample} needs {need} bytes, "
                f"over memory cap; raise ORTHOFLOW_MEM_CAP_MB"
            )
        if oversample > 1:
            coeffs = pad_spectrum(self, coeffs, dims)
        half = coeffs[:, :, : dims[2] // 2 + 1]
        ntot = dims[0] * dims[1] * dims[2]
        return sfft.irfftn(half * ntot, s=dims, workers=fft_workers())

    def from_physical(self, samples):
        """Coefficients of a real sample array (inverse of to_physical at oversample 1)."""
        if samples.shape != self.dims:
            raise ValueError(f"sample shape {samples.shape} != grid dims {self.dims}")
        half = sfft.rfftn(samples, workers=fft_workers()) / self.size
        return self.expand_half(half)

    def expand_half(self, half):
        """Rebuild a full Hermitian spectrum from its r2c half."""
        n1, n2, n3 = self.dims
        full = np.empty(self.dims, dtype=np.complex128)
        full[:, :, : self._halfn] = half
        j3 = np.arange(self._halfn, n3)
        full[:, :, self._halfn:] = np.conj(
            half[np.ix_(self._flip1, self._flip2, n3 - j3)]
        )
        return full


def make_grid(dims):
    """Validated FourierGrid; rejects odd/too-small/oversized axes."""
    return FourierGrid(dims)


def pad_spectrum(grid, coeffs, new_dims):
    """Scatter coefficients into a larger FFT layout (zero padding in k)."""
    n1, n2, n3 = grid.dims
    m1, m2, m3 = new_dims
    if m1 < n1 or m2 < n2 or m3 < n3:
        raise ValueError("pad_spectrum target must not be smaller than source")
    out = np.zeros(new_dims, dtype=np.complex128)
    h1, h2, h3 = n1 // 2, n2 // 2, n3 // 2
    # Nyquist rows are zero by invariant, so corner-block copy is exact
    for s1, d1 in ((slice(0, h1), slice(0, h1)), (slice(n1 - h1 + 1, n1), slice(m1 - h1 + 1, m1))):
        for s2, d2 in ((slice(0, h2), slice(0, h2)), (slice(n2 - h2 + 1, n2), slice(m2 - h2 + 1, m2))):
            for s3, d3 in ((slice(0, h3), slice(0, h3)), (slice(n3 - h3 + 1, n3), slice(m3 - h3 + 1, m3))):
                out[d1, d2, d3] = coeffs[s1, s2, s3]
    return out


def hermitian_defect(grid, coeffs):
    """Max |c(k) - conj(c(-k))| over the grid."""
    mirrored = np.conj(
        coeffs[np.ix_((-np.arange(grid.dims[0])) % grid.dims[0],
                      (-np.arange(grid.dims[1])) % grid.dims[1],
                      (-np.arange(grid.dims[2])) % grid.dims[2])]
    )
    return float(np.max(np.abs(coeffs - mirrored)))


def nyquist_mask(grid):
    """Boolean mask of the excluded Nyquist planes."""
    n1, n2, n3 = grid.dims
    m = np.zeros(grid.dims, dtype=bool)
    m[n1 // 2, :, :] = True
    m[:, n2 // 2, :] = True
    m[:, :, n3 // 2] = True
    return m


class SpectralVectorField:
    """Three-component velocity field stored as Fourier coefficients.

    Invariants: Hermitian symmetry (real physical field), finite
    amplitudes, zero Nyquist planes, and, when flagged mean-zero, a
    vanishing k=0 coefficient in every component.
    """

    def __init__(self, grid, coeffs, mean_zero=True, _validate=True):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (3,) + grid.dims:
            raise ValueError(
                f"coeffs shape {coeffs.shape} != (3, *dims) for dims {grid.dims}"
            )
        self.grid = grid
        self.coeffs = coeffs
        self.mean_zero = bool(mean_zero)
        if _validate:
            self.validate()

    def validate(self, tol=1e-12):
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")
        scale = float(np.max(np.abs(self.coeffs))) or 1.0
        nyq = nyquist_mask(self.grid)
        if np.max(np.abs(self.coeffs[:, nyq])) > tol * scale:
            raise ValueError("Nyquist planes must be zero (excluded from content)")
        for c in self.coeffs:
            if hermitian_defect(self.grid, c) > tol * scale:
                raise ValueError("coefficients violate Hermitian symmetry")
        if self.mean_zero and np.max(np.abs(self.coeffs[:, 0, 0, 0])) > tol * scale:
            raise ValueError("field flagged mean-zero has nonzero k=0 coefficient")

    def copy(self):
        return SpectralVectorField(
            self.grid, self.coeffs.copy(), self.mean_zero, _validate=False
        )

    def component(self, i):
        """Scalar coefficient array of velocity component i (1-based)."""
        return self.coeffs[i - 1]

    def amplitude(self):
        return float(np.max(np.abs(self.coeffs)))

    def l2(self):
        """Parseval l2 norm (equals the normalized-measure L2 norm)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def max_band(self):
        """Per-axis maximum |k_i| over the support."""
        nz = np.abs(self.coeffs) > 0.0
        band = []
        for ax in range(3):
            other = tuple(i for i in range(4) if i != ax + 1)
            active = nz.any(axis=other)
            ks = np.abs(self.grid.k_axis[ax][active])
            band.append(int(ks.max()) if ks.size else 0)
        return tuple(band)


def field_from_modes(grid, entries, mean_zero=True):
    """Field from {(component, k): amplitude} entries, Hermitian-completed.

    Each entry contributes amplitude*exp(i k.x) plus its conjugate at -k,
    i.e. 2*Re(amplitude*exp(i k.x)) in physical space.
    """
    coeffs = np.zeros((3,) + grid.dims, dtype=np.complex128)
    for (comp, k), amp in entries.items():
        i = grid.mode_index(k)
        j = grid.mode_index(tuple(-ki for ki in k))
        coeffs[comp - 1][i] += amp
        coeffs[comp - 1][j] += np.conj(amp)
    return SpectralVectorField(grid, coeffs, mean_zero=mean_zero)


def zero_field(grid):
    return SpectralVectorField(
        grid, np.zeros((3,) + grid.dims, dtype=np.complex128), _validate=False
    )


# -- exact linear operators -----------------------------------------------


def _k_of_axis(grid, axis):
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    return (grid.k1, grid.k2, grid.k3)[axis - 1]


def scalar_derivative(grid, coeffs, axis):
    """Multiply by i*k_axis."""
    return coeffs * (1j * _k_of_axis(grid, axis))


def derivative(f, axis):
    """Partial derivative along axis (1|2|3); preserves symmetry and mean."""
    mult = 1j * _k_of_axis(f.grid, axis)
    return SpectralVectorField(
        f.grid, f.coeffs * mult[None], mean_zero=True, _validate=False
    )


def fractional_laplacian(f, s):
    """Scale coefficients by |k|^s; s < 0 requires a mean-zero field."""
    if s < 0:
        if not f.mean_zero or np.max(np.abs(f.coeffs[:, 0, 0, 0])) != 0.0:
            raise ValueError(
                "fractional power s < 0 requires a mean-zero field (k=0 is singular)"
            )
    with np.errstate(divide="ignore"):
        mult = np.where(f.grid.k_sq > 0, f.grid.k_sq ** (s / 2.0), 0.0)
    mult[0, 0, 0] = 0.0 if s < 0 else (0.0 if f.mean_zero else 1.0)
    out = f.coeffs * mult[None]
    out[:, 0, 0, 0] = 0.0 if (s < 0 or f.mean_zero) else f.coeffs[:, 0, 0, 0]
    return SpectralVectorField(f.grid, out, mean_zero=f.mean_zero, _validate=False)


def heat_semigroup(f, t):
    """Exact heat propagator exp(t*Laplacian): multiplier exp(-t|k|^2)."""
    if t < 0:
        raise ValueError(f"heat semigroup requires t >= 0, got {t}")
    mult = np.exp(-t * f.grid.k_sq)
    return SpectralVectorField(
        f.grid, f.coeffs * mult[None], mean_zero=f.mean_zero, _validate=False
    )


def divergence_coeffs(f):
    """Spectral divergence i*k.u as a scalar coefficient array."""
    g = f.grid
    return 1j * (g.k1 * f.coeffs[0] + g.k2 * f.coeffs[1] + g.k3 * f.coeffs[2])


def divergence_residual(f):
    """Max divergence coefficient relative to the field amplitude scale."""
    scale = f.amplitude()
    if scale == 0.0:
        return 0.0
    kmax = max(1.0, float(np.sqrt(f.grid.k_sq.max())))
    return float(np.max(np.abs(divergence_coeffs(f)))) / (scale * kmax)


def leray_project(f):
    """Per-mode projection I - k k^T / |k|^2 onto divergence-free fields.

    The k=0 mode passes through unchanged.
    """
    g = f.grid
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_ksq = np.where(g.k_sq > 0, 1.0 / g.k_sq, 0.0)
    kdotu = g.k1 * f.coeffs[0] + g.k2 * f.coeffs[1] + g.k3 * f.coeffs[2]
    factor = kdotu * inv_ksq
    out = np.empty_like(f.coeffs)
    out[0] = f.coeffs[0] - g.k1 * factor
    out[1] = f.coeffs[1] - g.k2 * factor
    out[2] = f.coeffs[2] - g.k3 * factor
    return SpectralVectorField(g, out, mean_zero=f.mean_zero, _validate=False)


# -- dealiased products ----------------------------------------------------


def scalar_band(grid, coeffs):
    """Per-axis max |k_i| of the nonzero support of a scalar spectrum."""
    nz = np.abs(coeffs) > 0.0
    band = []
    for ax in range(3):
        other = tuple(i for i in range(3) if i != ax)
        active = nz.any(axis=other)
        ks = np.abs(grid.k_axis[ax][active])
        band.append(int(ks.max()) if ks.size else 0)
    return tuple(band)


def min_dims_for_product(band_a, band_b):
    """Smallest even dims whose 2/3-rule capacity holds the full product."""
    dims = []
    for ba, bb in zip(band_a, band_b):
        d = 3 * (ba + bb)
        d = max(d, 4)
        dims.append(d + (d % 2))
    return tuple(dims)


def require_product_capacity(dims, band_a, band_b):
    """Check that band_a + band_b fits under floor(dims/3) on every axis."""
    for ax, (d, ba, bb) in enumerate(zip(dims, band_a, band_b)):
        if ba + bb > d // 3:
            raise ValueError(
                f"grid too small for dealiased product: axis {ax} needs combined "
                f"band {ba + bb} <= cutoff {d // 3}; smallest adequate dims are "
                f"{min_dims_for_product(band_a, band_b)}"
            )


def dealias_mask(grid):
    c1, c2, c3 = grid.dealias_cutoff
    return (
        (np.abs(grid.k1) <= c1)
        & (np.abs(grid.k2) <= c2)
        & (np.abs(grid.k3) <= c3)
    )


def truncated_product(grid, a, b):
    """2/3-rule product of two scalar spectra: inputs and output truncated.

    Retained modes (below the cutoff) carry the exact product of the
    truncated inputs; no capacity check is made here.
    """
    mask = dealias_mask(grid)
    pa = grid.to_physical(np.where(mask, a, 0.0))
    pb = grid.to_physical(np.where(mask, b, 0.0))
    prod = grid.from_physical(pa * pb)
    return np.where(mask, prod, 0.0)


def dealiased_product(grid, a, b):
    """Alias-free product of two scalar spectra.

    Requires the combined band limit of the factors to fit the 2/3-rule
    capacity of the grid, which makes the result the exact product for
    every retained mode.
    """
    require_product_capacity(grid.dims, scalar_band(grid, a), scalar_band(grid, b))
    return truncated_product(grid, a, b)


def evaluate_physical(f, oversample=1):
    """Physical samples of all three components, shape (3, m1, m2, m3)."""
    return np.stack([f.grid.to_physical(c, oversample) for c in f.coeffs])


# -- dyadic bump profile ----------------------------------------------------


def _smoothstep(x):
    """C-infinity step from the exp(-1/x) mollifier: 0 for x<=0, 1 for x>=1."""
    x = np.asarray(x, dtype=np.float64)
    num = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
    den = num + np.where(1 - x > 0, np.exp(-1.0 / np.maximum(1 - x, 1e-300)), 0.0)
    return num / np.where(den == 0, 1.0, den)


class DyadicProfile:
    """Smooth bump chi on [1/2, 2] whose dyadic dilates partition unity.

    Built from a smooth cutoff phi (1 on |r|<=1, 0 on |r|>=2) as
    chi(r) = phi(r) - phi(2r); the dyadic sum then telescopes to 1 for
    every r > 0, so the partition identity is exact by construction.
    """

    @staticmethod
    def cutoff(r):
        r = np.abs(np.asarray(r, dtype=np.float64))
        return _smoothstep(2.0 - r)

    def chi(self, r):
        r = np.asarray(r, dtype=np.float64)
        return self.cutoff(r) - self.cutoff(2.0 * r)

    def support(self):
        return (0.5, 2.0)

    def partition_defect(self, radii):
        """Max |sum_j chi(r/2^j) - 1| over the given radii (r > 0)."""
        radii = np.asarray(radii, dtype=np.float64)
        jlo = int(np.floor(np.log2(radii.min()))) - 2
        jhi = int(np.ceil(np.log2(radii.max()))) + 2
        total = np.zeros_like(radii)
        for j in range(jlo, jhi + 1):
            total += self.chi(radii / 2.0 ** j)
        return float(np.max(np.abs(total - 1.0)))


def fnv1a64(data):
    """FNV-1a 64-bit checksum of a bytes-like payload."""
    h = _FNV_OFFSET
    for byte in bytes(data):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h
