"""dispersia: dispersion forces from electromagnetic Green tensors.

Computes Casimir-Polder and two-atom van der Waals potentials, planar
Casimir pressure, and the associated universal scaling laws for canonical
geometries (perfectly conducting plate, magnetoelectric half-space, slab,
conducting sphere), working throughout at imaginary frequency in natural
units (hbar = c = eps0 = mu0 = 1).
"""

from .quadrature import (
    NonConvergenceError,
    PowerLawFit,
    QuadratureConfig,
    fit_power_law,
    gradient_fd,
    integrate_semi_infinite,
)

__version__ = "0.1.0"

__all__ = [
    "NonConvergenceError",
    "PowerLawFit",
    "QuadratureConfig",
    "fit_power_law",
    "gradient_fd",
    "integrate_semi_infinite",
    "__version__",
]
