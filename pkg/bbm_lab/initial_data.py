"""Counterexample data families: sharp boxes at +-N, the gamma-scaled boxes and the periodic band."""
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator

from bbm_lab.errors import GridError
from bbm_lab.spectral import SQRT_2PI, FrequencyGrid, GridMode, SpectralField

MIN_N = 8
_ALIGN_TOL = 1e-9


class DataFamily(str, Enum):
    SHARP = "sharp"
    BT_SCALED = "bt_scaled"
    PERIODIC = "periodic"


class DataFamilySpec(BaseModel):
    family: DataFamily = DataFamily.SHARP
    N: float
    s: float = 0.0
    sigma: float = 0.1
    width: int = 1

    @model_validator(mode="after")
    def _check(self):
        if self.N < MIN_N:
            raise ValueError(f"N must be >= {MIN_N}, got {self.N}")
        if self.family is DataFamily.BT_SCALED and not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.family is DataFamily.PERIODIC:
            if self.N != int(self.N):
                raise ValueError(f"periodic data needs an integer N, got {self.N}")
            if self.width < 0 or self.N - self.width < 1:
                raise ValueError("periodic band must exclude the zero mode")
        return self


def _require_line(grid: FrequencyGrid) -> None:
    if grid.mode is not GridMode.LINE:
        raise GridError("this family lives on the line approximation grid")


def _require_extent(grid: FrequencyGrid, N: float) -> None:
    if grid.xi_max < 2 * N + 4:
        raise GridError(f"grid radius {grid.xi_max:g} below 2N+4 = {2 * N + 4:g}")


def _on_lattice(value: float, grid: FrequencyGrid) -> int:
    j = round(value / grid.delta_xi)
    if abs(j * grid.delta_xi - value) > _ALIGN_TOL * max(1.0, abs(value)):
        raise GridError(f"{value:g} is not aligned with the lattice spacing {grid.delta_xi:g}")
    return j


def _even_box(grid: FrequencyGrid, lo_index: int, hi_index: int, amplitude: float) -> SpectralField:
    coeffs = np.zeros(grid.size, dtype=np.complex128)
    m = grid.half_modes
    coeffs[m + lo_index: m + hi_index + 1] = amplitude
    coeffs[m - hi_index: m - lo_index + 1] = amplitude
    return SpectralField(grid, coeffs)


def phi_sharp(N: float, grid: FrequencyGrid) -> SpectralField:
    """Indicator of N-1 <= |xi| <= N+1, boundary nodes included."""
    _require_line(grid)
    _require_extent(grid, N)
    if N - 1 <= 0:
        raise GridError("sharp family needs N > 1")
    lo = _on_lattice(N - 1, grid)
    hi = _on_lattice(N + 1, grid)
    return _even_box(grid, lo, hi, 1.0)


def phi_sharp_physical(N: float, x):
    """Exact inverse transform of phi_sharp: (4/sqrt(2 pi)) cos(N x) sin(x)/x."""
    x = np.asarray(x, dtype=float)
    return (4.0 / SQRT_2PI) * np.cos(N * x) * np.sinc(x / math.pi)


def bt_gamma(N: float, sigma: float) -> float:
    return N ** (-sigma)


def phi_bt(N: float, s: float, sigma: float, grid: FrequencyGrid) -> SpectralField:
    """Boxes of half-width gamma = N^-sigma at +-N with amplitude gamma^-1/2 N^-s."""
    _require_line(grid)
    _require_extent(grid, N)
    gamma = bt_gamma(N, sigma)
    if grid.delta_xi > gamma / 8:
        raise GridError(f"gamma={gamma:.4g} spans fewer than 8 nodes at delta_xi={grid.delta_xi:g}")
    lo = math.ceil((N - gamma) / grid.delta_xi - _ALIGN_TOL)
    hi = math.floor((N + gamma) / grid.delta_xi + _ALIGN_TOL)
    return _even_box(grid, lo, hi, gamma ** -0.5 * N ** (-s))


def phi_periodic(N: int, width: int, grid: FrequencyGrid) -> SpectralField:
    """Unit coefficients on N-width <= |n| <= N+width; the zero mode stays empty."""
    if grid.mode is not GridMode.PERIODIC:
        raise GridError("periodic family needs a periodic grid")
    if N + width > grid.half_modes:
        raise GridError(f"band N+width={N + width} exceeds the grid (M={grid.half_modes})")
    if N - width < 1:
        raise GridError("band reaches the zero mode")
    return _even_box(grid, int(N - width), int(N + width), 1.0)


def make_data(spec: DataFamilySpec, grid: FrequencyGrid) -> SpectralField:
    if spec.family is DataFamily.SHARP:
        return phi_sharp(spec.N, grid)
    if spec.family is DataFamily.BT_SCALED:
        return phi_bt(spec.N, spec.s, spec.sigma, grid)
    return phi_periodic(int(spec.N), spec.width, grid)


def family_for(grid: FrequencyGrid, requested: Optional[DataFamily] = None) -> DataFamily:
    """Periodic grids always carry the periodic band; otherwise the requested line family."""
    if grid.mode is GridMode.PERIODIC:
        return DataFamily.PERIODIC
    if requested is DataFamily.PERIODIC:
        raise GridError("periodic family needs a periodic grid")
    return requested or DataFamily.SHARP
