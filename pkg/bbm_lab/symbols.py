"""Closed-form scalar symbols of the BBM multiplier problem.

All functions accept scalars or numpy arrays and broadcast.
"""
from dataclasses import dataclass

import numpy as np

SERIES_RADIUS = 1e-4


@dataclass(frozen=True)
class ResonancePoint:
    xi: float
    xi1: float


def phi(xi):
    """BBM dispersion symbol xi / (1 + xi^2); odd, |phi| <= 1/2 with the maximum at xi = 1."""
    xi = np.asarray(xi, dtype=float)
    return xi / (1.0 + xi * xi)


def _coords(p):
    if isinstance(p, ResonancePoint):
        return p.xi, p.xi1
    return p


def theta_direct(p) -> np.ndarray:
    """phi(xi1) + phi(xi - xi1) - phi(xi); accepts a ResonancePoint or an (xi, xi1) pair of arrays."""
    xi, xi1 = _coords(p)
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    return phi(xi1) + phi(xi - xi1) - phi(xi)


def theta_rational(p) -> np.ndarray:
    """Factored form of the resonance function, kept as a cross-check of theta_direct."""
    xi, xi1 = _coords(p)
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = xi - xi1
    numerator = xi * xi1 * xi2 * (xi * xi - xi * xi1 + xi1 * xi1 + 3.0)
    denominator = (1.0 + xi1 * xi1) * (1.0 + xi2 * xi2) * (1.0 + xi * xi)
    return numerator / denominator


def _expm1(z: np.ndarray) -> np.ndarray:
    # exp(x + iy) - 1 without cancellation in either part
    x, y = z.real, z.imag
    s = np.sin(0.5 * y)
    return (np.expm1(x) * np.cos(y) - 2.0 * s * s) + 1j * (np.exp(x) * np.sin(y))


def psi_kernel(z):
    """(e^z - 1)/z with the removable singularity filled in; psi_kernel(0) = 1."""
    z = np.asarray(z, dtype=np.complex128)
    small = np.abs(z) < SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    direct = _expm1(safe) / safe
    series = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    out = np.where(small, series, direct)
    return out if out.ndim else out[()]
