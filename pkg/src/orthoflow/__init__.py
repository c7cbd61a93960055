"""orthoflow: spectral laboratory for frequency-orthogonal Navier-Stokes data."""

from .spectral import (
    DyadicProfile,
    FourierGrid,
    SpectralVectorField,
    dealiased_product,
    derivative,
    divergence_residual,
    evaluate_physical,
    field_from_modes,
    fractional_laplacian,
    heat_semigroup,
    leray_project,
    make_grid,
)

__version__ = "0.1.0"

__all__ = [
    "DyadicProfile",
    "FourierGrid",
    "SpectralVectorField",
    "dealiased_product",
    "derivative",
    "divergence_residual",
    "evaluate_physical",
    "field_from_modes",
    "fractional_laplacian",
    "heat_semigroup",
    "leray_project",
    "make_grid",
    "__version__",
]
