"""Fully nonlinear RK4 evolution of i u_t = phi(D) u + 1/2 phi(D) u^2 and its diagnostics."""
import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from bbm_lab.errors import BlowupError, ConfigError, GridError, HermitianViolationError, QuadratureError
from bbm_lab.picard import Trajectory
from bbm_lab.spectral import (
    SQRT_2PI,
    SUPPORT_RTOL,
    FrequencyGrid,
    SpectralField,
    check_product_support,
    convolve,
    hermitian_deviation,
    hs_norm,
)
from bbm_lab.symbols import phi

log = logging.getLogger(__name__)

MAX_DT = 0.1
HERMITIAN_TOL = 1e-12


class Scheme(str, Enum):
    RK4 = "rk4"


class SolverConfig(BaseModel):
    dt: float = Field(gt=0, le=MAX_DT)
    n_steps: int = Field(ge=1)
    scheme: Scheme = Scheme.RK4
    conservation_check_every: int = Field(default=0, ge=0)
    store_every: int = Field(default=1, ge=1)
    support_rtol: float = Field(default=SUPPORT_RTOL, gt=0)

    @model_validator(mode="after")
    def _check_storage(self):
        if self.n_steps % self.store_every:
            raise ValueError(f"store_every={self.store_every} must divide n_steps={self.n_steps}")
        return self

    @property
    def t_final(self) -> float:
        return self.dt * self.n_steps

    @classmethod
    def for_time(cls, t_final: float, dt: float, **kwargs) -> "SolverConfig":
        n_steps = max(1, round(t_final / dt))
        if not math.isclose(n_steps * dt, t_final, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(f"dt={dt} does not divide t={t_final}")
        return cls(dt=dt, n_steps=n_steps, **kwargs)


def _symbol(grid: FrequencyGrid) -> np.ndarray:
    return -1j * phi(grid.xi)


def _rhs(coeffs: np.ndarray, grid: FrequencyGrid, symbol: np.ndarray, real: bool, rtol: float) -> np.ndarray:
    check_product_support(coeffs, coeffs, grid, rtol)
    return symbol * (coeffs + 0.5 * convolve(coeffs, coeffs, grid, real=real))


def rhs(u: SpectralField, support_rtol: float = SUPPORT_RTOL) -> SpectralField:
    """u_t on the frequency side: -i phi(xi) (u + 1/2 (u^2)^)."""
    return SpectralField(u.grid, _rhs(u.coeffs, u.grid, _symbol(u.grid), u.hermitian, support_rtol))


def evolve(u0: SpectralField, cfg: SolverConfig, backward: bool = False) -> Trajectory:
    """Classical RK4 on the coefficient vector.

    The returned trajectory stores every ``cfg.store_every``-th step; its times
    are elapsed times, so a backward run reports 0 .. t_final as well.
    """
    if not u0.hermitian:
        raise HermitianViolationError("initial data must be real-valued (Hermitian spectrum)")
    grid = u0.grid
    symbol = _symbol(grid)
    h = -cfg.dt if backward else cfg.dt
    rtol = cfg.support_rtol

    def f(c):
        return _rhs(c, grid, symbol, True, rtol)

    c = u0.coeffs.copy()
    rows = [c.copy()]
    h1_start = invariant_h1(u0)
    for n in range(1, cfg.n_steps + 1):
        k1 = f(c)
        k2 = f(c + (0.5 * h) * k1)
        k3 = f(c + (0.5 * h) * k2)
        k4 = f(c + h * k3)
        c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(c)):
            raise BlowupError(f"non-finite coefficients after step {n} (t={n * cfg.dt:g})")
        deviation = hermitian_deviation(c)
        if deviation > HERMITIAN_TOL:
            raise HermitianViolationError(f"Hermitian symmetry broken by {deviation:.3e} at step {n}")
        if n % cfg.store_every == 0:
            rows.append(c.copy())
        if cfg.conservation_check_every and n % cfg.conservation_check_every == 0:
            current = SpectralField(grid, c)
            drift = abs(invariant_h1(current) - h1_start) / h1_start if h1_start else 0.0
            log.debug("step %d: H1 drift %.3e, mean %.3e", n, drift, invariant_mean(current))
    times = np.arange(len(rows)) * (cfg.dt * cfg.store_every)
    return Trajectory(grid, times, np.stack(rows))


def _require_hermitian(u: SpectralField) -> None:
    if not u.hermitian:
        raise GridError("conserved quantities are defined for real-valued fields")


def invariant_mean(u: SpectralField) -> float:
    """int u dx = sqrt(2 pi) Re u^(0)."""
    _require_hermitian(u)
    return SQRT_2PI * float(u.coeffs[u.grid.half_modes].real)


def invariant_h1(u: SpectralField) -> float:
    """int (u^2 + u_x^2) dx."""
    _require_hermitian(u)
    return hs_norm(u, 1.0) ** 2


def residual_ivp1(traj: Trajectory, support_rtol: float = SUPPORT_RTOL) -> float:
    """Max over interior nodes of || (1+xi^2) u_t + i xi u + i xi (u^2)^/2 ||_L2, u_t by 4th-order differences."""
    if len(traj.times) < 5:
        raise QuadratureError("residual needs at least five time nodes")
    grid = traj.grid
    xi = grid.xi
    c = traj.coeffs
    worst = 0.0
    for q in range(2, len(traj.times) - 2):
        ut = (c[q - 2] - 8.0 * c[q - 1] + 8.0 * c[q + 1] - c[q + 2]) / (12.0 * traj.dt)
        check_product_support(c[q], c[q], grid, support_rtol)
        square = convolve(c[q], c[q], grid, real=hermitian_deviation(c[q]) <= HERMITIAN_TOL)
        residual = (1.0 + xi**2) * ut + 1j * xi * (c[q] + 0.5 * square)
        worst = max(worst, math.sqrt(float(np.sum(np.abs(residual) ** 2)) * grid.weight))
    return worst


def smooth_data(grid: FrequencyGrid, amplitude: float = 0.5, width: float = 1.0) -> SpectralField:
    """Gaussian spectrum a exp(-xi^2 / (2 width^2)); real and even."""
    return SpectralField(grid, amplitude * np.exp(-0.5 * (grid.xi / width) ** 2))


def observed_order(errors, ratio: float = 2.0) -> list:
    """Convergence orders log_ratio(e_i / e_{i+1}) for successively refined runs."""
    orders = []
    for coarse, fine in zip(errors, errors[1:]):
        if fine == 0.0 or coarse == 0.0:
            orders.append(math.inf if fine == 0.0 else 0.0)
        else:
            orders.append(math.log(coarse / fine) / math.log(ratio))
    return orders
