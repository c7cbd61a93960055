import numpy as np
import pytest

from orthoflow.spectral import (
    SpectralVectorField,
    dealias_mask,
    leray_project,
    make_grid,
)


def random_field(grid, kmax, seed, mean_zero=True, divergence_free=False):
    """Seeded random band-limited field with |k_i| <= kmax on every axis."""
    rng = np.random.default_rng(seed)
    phys = rng.standard_normal((3,) + grid.dims)
    coeffs = np.stack([grid.from_physical(p) for p in phys])
    band = (
        (np.abs(grid.k1) <= kmax)
        & (np.abs(grid.k2) <= kmax)
        & (np.abs(grid.k3) <= kmax)
    )
    coeffs *= band[None]
    if mean_zero:
        coeffs[:, 0, 0, 0] = 0.0
    f = SpectralVectorField(grid, coeffs, mean_zero=mean_zero)
    if divergence_free:
        f = leray_project(f)
    return f


def random_scalar(grid, kmax, seed, mean_zero=True):
    rng = np.random.default_rng(seed)
    c = grid.from_physical(rng.standard_normal(grid.dims))
    band = (
        (np.abs(grid.k1) <= kmax)
        & (np.abs(grid.k2) <= kmax)
        & (np.abs(grid.k3) <= kmax)
    )
    c *= band
    if mean_zero:
        c[0, 0, 0] = 0.0
    return c


@pytest.fixture(scope="session")
def grid16():
    return make_grid((16, 16, 16))


@pytest.fixture(scope="session")
def grid24():
    return make_grid((24, 24, 24))


@pytest.fixture(scope="session")
def grid32():
    return make_grid((32, 32, 32))


@pytest.fixture(scope="session")
def grid64():
    return make_grid((64, 64, 64))
