"""Construction of frequency-orthogonal initial data and hypothesis checks.

The datum has three velocity components with pairwise disjoint Fourier
supports, each supported on a coordinate plane k_i = 0 so that component
i is a function of the other two coordinates (hence divergence-free and
nonlinearly degenerate on its own).

Components 1 and 2 carry Gaussian-equalized coefficients on square bands
at scales N and ceil(N^(1+eps)); their coefficients are chosen so that
after heat flow to the band's natural time every retained coefficient is
equal, which is what drives the L-infinity lower bound and the largeness
of the critical-space norm.  Component 3 is a single low mode.

Everything here is deterministic; real fields are obtained by Hermitian
symmetrization (cosine pairs), distributing the L2 budget over +/-m.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralVectorField, make_grid


@dataclass(frozen=True)
class ConstructionParams:
    """Parameters (N, eps, delta, C) plus the per-component L2 budgets.

    budget_profile:
      "largeness"  -- budgets log N / C, log N^(1+eps) / C, delta log N^(1+eps) / C
                      (the arbitrarily-large-data example);
      "uniform_delta" -- all three components get delta log N^(1+eps) / C
                      (the uniform smallness hypothesis used by the
                      perturbation-condition evaluator).
    """

    N: int
    eps: float
    delta: float = None
    C: float = 1.0
    budget_profile: str = "largeness"
    strict_separation: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.delta is None:
            object.__setattr__(self, "delta", min(self.eps / 8.0, 0.05))
        if self.delta >= self.eps / 4.0:
            raise ValueError(
                f"delta must be < eps/4 = {self.eps / 4.0}, got {self.delta}"
            )
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.C <= 0:
            raise ValueError("C must be > 0")
        if self.budget_profile not in ("largeness", "uniform_delta"):
            raise ValueError(f"unknown budget profile {self.budget_profile!r}")
        if self.strict_separation and 2 * self.N > self.high_scale:
            raise ValueError(
                f"bands [{self.N},{2*self.N}] and "
                f"[{self.high_scale},{2*self.high_scale}] overlap "
                f"(2N={2*self.N} > ceil(N^(1+eps))={self.high_scale}); "
                f"increase N or eps"
            )

    @property
    def high_scale(self):
        """ceil(N^(1+eps)): the second component's band start."""
        return math.ceil(self.N ** (1.0 + self.eps))

    @property
    def log_high(self):
        """log N^(1+eps), natural log."""
        return (1.0 + self.eps) * math.log(self.N)

    def l2_targets(self):
        if self.budget_profile == "largeness":
            return (
                math.sqrt(math.log(self.N) / self.C),
                math.sqrt(self.log_high / self.C),
                math.sqrt(self.delta * self.log_high / self.C),
            )
        t = math.sqrt(self.delta * self.log_high / self.C)
        return (t, t, t)

    def band(self, comp):
        if comp == 1:
            return (self.N, 2 * self.N)
        if comp == 2:
            return (self.high_scale, 2 * self.high_scale)
        if comp == 3:
            return (1, 1)
        raise ValueError(f"component must be 1, 2 or 3, got {comp}")

    def equalization_time(self, comp):
        """Heat time at which the component's coefficients equalize."""
        if comp == 1:
            return self.N ** -2.0
        if comp == 2:
            return float(self.N) ** (-2.0 * (1.0 + self.eps))
        raise ValueError("only components 1 and 2 are equalized")


@dataclass
class PlanarComponent:
    """One velocity component supported on the plane k_axis = 0.

    modes/coeffs describe the positive-quadrant cosine expansion:
    u(x) = sum_m 2 c_m cos(m . x) with m running over (m_a, m_b) pairs in
    plane_axes; the stored spectral coefficient at +/-m is c_m.  All c_m
    are real and positive, so the field peaks at x = 0.
    """

    axis: int                      # velocity slot, 1-based; also k_axis == 0
    plane_axes: tuple              # the two coordinate axes the field depends on
    modes_a: np.ndarray            # wavevector entries along plane_axes[0]
    modes_b: np.ndarray            # along plane_axes[1]
    coeffs: np.ndarray             # c_m > 0, same shape as the mode grids
    heated_coefficient: float | None  # common value of c_m e^{-t|m|^2} at t_eq
    equalization_time: float | None

    def l2(self):
        return float(np.sqrt(2.0 * np.sum(self.coeffs ** 2)))

    def mode_radii_sq(self):
        return self.modes_a.astype(np.float64) ** 2 + self.modes_b.astype(
            np.float64
        ) ** 2

    def heat_sup(self, t):
        """sup_x e^{tA}u = value at x = 0 (coefficients are positive)."""
        return float(2.0 * np.sum(self.coeffs * np.exp(-t * self.mode_radii_sq())))

    def coefficient_l1_decayed(self, t):
        return self.heat_sup(t)

    def heat_l2(self, t):
        return float(
            np.sqrt(2.0 * np.sum(self.coeffs ** 2 * np.exp(-2 * t * self.mode_radii_sq())))
        )

    def band_radii(self):
        r = np.sqrt(self.mode_radii_sq())
        return float(r.min()), float(r.max())

    def scatter_into(self, grid, coeffs_out):
        """Add the Hermitian pair expansion into a full 3d coefficient array."""
        k = [0, 0, 0]
        comp = coeffs_out[self.axis - 1]
        ma = self.modes_a.ravel()
        mb = self.modes_b.ravel()
        cs = self.coeffs.ravel()
        for a, b, c in zip(ma, mb, cs):
            k[self.plane_axes[0] - 1] = int(a)
            k[self.plane_axes[1] - 1] = int(b)
            comp[grid.mode_index(tuple(k))] += c
            comp[grid.mode_index(tuple(-x for x in k))] += c


@dataclass
class OrthogonalData:
    """The certified initial datum (three planar components + parameters)."""

    params: ConstructionParams
    components: tuple  # three PlanarComponent

    @property
    def equalized_values(self):
        """Common heated coefficients of components 1 and 2, in the
        complex-expansion normalization (stored cosine pairs carry 1/sqrt(2))."""
        return tuple(
            None if c.heated_coefficient is None
            else c.heated_coefficient * math.sqrt(2.0)
            for c in self.components[:2]
        )

    def component_l2(self, i):
        return self.components[i - 1].l2()

    def max_band(self):
        """Per-axis max |k| over all components."""
        band = [0, 0, 0]
        for comp in self.components:
            for ax, modes in zip(comp.plane_axes, (comp.modes_a, comp.modes_b)):
                band[ax - 1] = max(band[ax - 1], int(np.max(np.abs(modes))))
        return tuple(band)

    def natural_grid_dims(self, factor=3):
        dims = []
        for b in self.max_band():
            d = max(4, factor * b)
            dims.append(d + d % 2)
        return tuple(dims)

    def to_field(self, grid=None):
        """Materialize as a 3d spectral vector field."""
        if grid is None:
            grid = make_grid(self.natural_grid_dims())
        coeffs = np.zeros((3,) + grid.dims, dtype=np.complex128)
        for comp in self.components:
            comp.scatter_into(grid, coeffs)
        return SpectralVectorField(grid, coeffs, mean_zero=True)

    def component_field(self, i, grid=None):
        if grid is None:
            grid = make_grid(self.natural_grid_dims())
        coeffs = np.zeros((3,) + grid.dims, dtype=np.complex128)
        self.components[i - 1].scatter_into(grid, coeffs)
        return SpectralVectorField(grid, coeffs, mean_zero=True)


def build_component(axis, params):
    """Gaussian-equalized band component for axis 1 (scale N) or 2 (scale
    ceil(N^(1+eps))).

    Coefficients on the square band equalize exactly under the heat flow at
    the band's natural time, and the L2 norm meets the component budget
    exactly.  Returns the planar component.
    """
    if axis not in (1, 2):
        raise ValueError("build_component handles components 1 and 2")
    lo, hi = params.band(axis)
    t_eq = params.equalization_time(axis)
    target = params.l2_targets()[axis - 1]
    ms = np.arange(lo, hi + 1, dtype=np.int64)
    ma, mb = np.meshgrid(ms, ms, indexing="ij")
    radii_sq = ma.astype(np.float64) ** 2 + mb.astype(np.float64) ** 2
    growth = np.exp(t_eq * radii_sq)           # inverse heat weight
    # 2 A^2 sum exp(2 t |m|^2) = target^2  (the factor 2 from the +/-m pairs)
    amp = target / math.sqrt(2.0 * float(np.sum(growth ** 2)))
    coeffs = amp * growth
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("equalized coefficients overflowed; parameters invalid")
    plane = {1: (2, 3), 2: (1, 3)}[axis]
    return PlanarComponent(
        axis=axis,
        plane_axes=plane,
        modes_a=ma,
        modes_b=mb,
        coeffs=coeffs,
        heated_coefficient=float(amp),
        equalization_time=t_eq,
    )


def build_component3(params):
    """Third component: a single cosine at (1, 1, 0) in the (x1, x2) plane,
    with L2 norm exactly the third budget."""
    target = params.l2_targets()[2]
    c = target / math.sqrt(2.0)
    return PlanarComponent(
        axis=3,
        plane_axes=(1, 2),
        modes_a=np.array([[1]]),
        modes_b=np.array([[1]]),
        coeffs=np.array([[c]]),
        heated_coefficient=None,
        equalization_time=None,
    )


def build_orthogonal_data(params):
    return OrthogonalData(
        params=params,
        components=(
            build_component(1, params),
            build_component(2, params),
            build_component3(params),
        ),
    )


# -- hypothesis validation ---------------------------------------------------


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    measured: float | str
    bound: float | str
    note: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "bound": self.bound,
            "note": self.note,
        }


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    info: list = field(default_factory=list)

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "all_passed": self.all_passed,
            "checks": [c.to_dict() for c in self.checks],
            "info": [c.to_dict() for c in self.info],
        }

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: measured {c.measured} vs bound {c.bound}")
            if not c.passed and c.note:
                lines.append(f"       {c.note}")
        for c in self.info:
            lines.append(f"[info] {c.name}: {c.measured} vs {c.bound} {c.note}")
        return "\n".join(lines)


def _component_support_sets(data):
    sets = []
    for comp in data.components:
        s = set()
        for a, b in zip(comp.modes_a.ravel(), comp.modes_b.ravel()):
            k = [0, 0, 0]
            k[comp.plane_axes[0] - 1] = int(a)
            k[comp.plane_axes[1] - 1] = int(b)
            s.add(tuple(k))
            s.add(tuple(-x for x in k))
        sets.append(s)
    return sets


def validate_hypotheses(data, l3_oversample=None):
    """Check every structural hypothesis of the construction.

    (a) pairwise disjoint frequency supports; (b) band containment at the
    two scales; (c) plane constraints k_i = 0; (d) mean zero; (e) L2 norms
    meet the budgets (and the uniform log-budget); (f) the third
    component's L3 bound.  Failures are report entries, never errors.
    """
    from .norms import lp_norm  # local import to avoid a cycle

    p = data.params
    report = ValidationReport()

    supports = _component_support_sets(data)
    overlap = (
        (supports[0] & supports[1])
        | (supports[0] & supports[2])
        | (supports[1] & supports[2])
    )
    report.checks.append(
        HypothesisCheck(
            "disjoint_supports",
            not overlap,
            f"{len(overlap)} shared modes",
            "0 shared modes",
        )
    )

    band_ok = True
    detail = []
    for i, comp in enumerate(data.components[:2], start=1):
        lo, hi = p.band(i)
        rmin, rmax = comp.band_radii()
        ok = rmin >= lo and rmax <= math.sqrt(2.0) * hi
        band_ok &= ok
        detail.append(f"comp{i}: radii [{rmin:.1f}, {rmax:.1f}] band [{lo}, {hi}]")
    report.checks.append(
        HypothesisCheck(
            "band_containment",
            band_ok,
            "; ".join(detail),
            "radii within [scale, sqrt(2) * 2 scale] per component",
        )
    )
    report.info.append(
        HypothesisCheck(
            "scale_separation",
            2 * p.N <= p.high_scale,
            f"2N = {2 * p.N}",
            f"ceil(N^(1+eps)) = {p.high_scale}",
            note="magnitude bands overlap when 2N > ceil(N^(1+eps))",
        )
    )

    plane_ok = all(
        comp.axis not in comp.plane_axes for comp in data.components
    )
    report.checks.append(
        HypothesisCheck(
            "plane_constraints",
            plane_ok,
            "k_i = 0 on every component support" if plane_ok else "violated",
            "component i independent of x_i",
        )
    )

    mean_ok = all(
        np.all((c.modes_a != 0) | (c.modes_b != 0)) for c in data.components
    )
    report.checks.append(
        HypothesisCheck("mean_zero", mean_ok, "no k=0 modes", "no k=0 modes")
    )

    targets = p.l2_targets()
    uniform = math.sqrt(p.log_high / p.C)
    l2_ok = True
    detail = []
    for i in (1, 2, 3):
        measured = data.component_l2(i)
        ok = abs(measured - targets[i - 1]) <= 1e-12 * targets[i - 1]
        ok &= measured <= uniform * (1 + 1e-12)
        l2_ok &= ok
        detail.append(f"comp{i}: {measured:.6f} (budget {targets[i-1]:.6f})")
    report.checks.append(
        HypothesisCheck(
            "l2_budgets",
            l2_ok,
            "; ".join(detail),
            f"equal to budget and <= uniform bound {uniform:.6f}",
        )
    )
    strengthened = math.sqrt(p.delta * p.log_high / p.C)
    report.info.append(
        HypothesisCheck(
            "l2_delta_budget",
            all(data.component_l2(i) <= strengthened * (1 + 1e-12) for i in (1, 2, 3)),
            f"max comp L2 = {max(data.component_l2(i) for i in (1,2,3)):.6f}",
            f"delta-strengthened bound {strengthened:.6f}",
            note="the largeness profile deliberately exceeds this on components 1-2",
        )
    )

    # (f) third-component L3 bound
    f3 = data.component_field(3, grid=make_grid((8, 8, 8)))
    l3 = lp_norm(f3, 3, oversample=l3_oversample or 16)
    bound_f = (
        p.N ** (1.0 / 3.0 - p.delta * (1.0 + p.eps))
        * p.log_high ** -0.5
        / p.C
    )
    report.checks.append(
        HypothesisCheck(
            "u3_l3_bound",
            l3 <= bound_f,
            f"{l3:.6f}",
            f"{bound_f:.6f}",
            note="L3 norm of the single low mode against the smallness bound",
        )
    )
    return report
