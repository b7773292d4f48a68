"""Frequency-side representation of functions on the line or the torus.

Coefficients live on the symmetric lattice xi_j = j * delta_xi, j = -M..M, stored
in a flat array at offset j + M.  The transform convention is the unitary one,

    u(x) = (w / sqrt(2 pi)) * sum_j c_j exp(i x xi_j),

with quadrature weight w = delta_xi on the line approximation and w = 1 on the
torus.  Norms, products and samples below all use this single convention.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy import fft as sfft

from bbm_lab.errors import GridError, SupportOverflowError
from bbm_lab.symbols import phi

log = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
HERMITIAN_RTOL = 1e-12
SUPPORT_RTOL = 1e-6

SobolevIndex = float
Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


class GridMode(str, Enum):
    LINE = "line_approx"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class FrequencyGrid:
    half_modes: int
    delta_xi: float
    mode: GridMode = GridMode.LINE

    @property
    def size(self) -> int:
        return 2 * self.half_modes + 1

    @cached_property
    def xi(self) -> np.ndarray:
        nodes = np.arange(-self.half_modes, self.half_modes + 1) * self.delta_xi
        nodes.setflags(write=False)
        return nodes

    @property
    def xi_max(self) -> float:
        return self.half_modes * self.delta_xi

    @property
    def weight(self) -> float:
        return self.delta_xi if self.mode is GridMode.LINE else 1.0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.delta_xi

    @cached_property
    def fft_length(self) -> int:
        # room for the full linear convolution of two grid-supported spectra
        return sfft.next_fast_len(2 * self.size, real=True)

    def index(self, xi: float) -> int:
        """Array offset of the node at frequency xi; xi must sit on the lattice."""
        j = round(xi / self.delta_xi)
        if abs(j * self.delta_xi - xi) > 1e-9 * max(1.0, abs(xi)):
            raise GridError(f"frequency {xi} is not a node of the lattice with spacing {self.delta_xi}")
        if abs(j) > self.half_modes:
            raise GridError(f"frequency {xi} lies outside the grid (xi_max={self.xi_max})")
        return j + self.half_modes


def make_grid(half_modes: int, delta_xi: float, mode: Union[GridMode, str] = GridMode.LINE) -> FrequencyGrid:
    mode = GridMode(mode)
    if int(half_modes) != half_modes or half_modes < 4:
        raise GridError(f"half_modes must be an integer >= 4, got {half_modes}")
    if not math.isfinite(delta_xi) or delta_xi <= 0:
        raise GridError(f"delta_xi must be positive, got {delta_xi}")
    if mode is GridMode.PERIODIC and delta_xi != 1.0:
        raise GridError(f"periodic grids use integer wavenumbers (delta_xi=1), got {delta_xi}")
    grid = FrequencyGrid(int(half_modes), float(delta_xi), mode)
    log.debug("grid: %d nodes, xi_max=%g, fft length %d", grid.size, grid.xi_max, grid.fft_length)
    return grid


def hermitian_deviation(coeffs: np.ndarray) -> float:
    """max |c(-j) - conj(c(j))| relative to max |c|; 0 for the zero array."""
    scale = float(np.max(np.abs(coeffs), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(coeffs[::-1])))) / scale


def is_hermitian(coeffs: np.ndarray) -> bool:
    return hermitian_deviation(coeffs) <= HERMITIAN_RTOL


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable coefficient vector on a FrequencyGrid.

    ``hermitian`` is detected from the coefficients when not given; passing
    ``hermitian=True`` for a non-symmetric vector is an error.
    """

    grid: FrequencyGrid
    coeffs: np.ndarray
    hermitian: Optional[bool] = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.size,):
            raise GridError(f"expected {self.grid.size} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise GridError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        symmetric = is_hermitian(c)
        if self.hermitian is None:
            object.__setattr__(self, "hermitian", symmetric)
        elif self.hermitian and not symmetric:
            raise GridError(f"coefficients are not Hermitian (deviation {hermitian_deviation(c):.3e})")

    def at(self, xi: float) -> complex:
        return complex(self.coeffs[self.grid.index(xi)])

    def _check_grid(self, other: "SpectralField") -> None:
        if other.grid != self.grid:
            raise GridError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, alpha: complex) -> "SpectralField":
        return SpectralField(self.grid, alpha * self.coeffs)

    __rmul__ = __mul__


def zeros(grid: FrequencyGrid) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.size, dtype=np.complex128))


def _sample(grid: FrequencyGrid, m: Symbol) -> np.ndarray:
    values = m(grid.xi) if callable(m) else m
    values = np.broadcast_to(np.asarray(values, dtype=np.complex128), (grid.size,))
    if not np.all(np.isfinite(values)):
        raise GridError("symbol takes non-finite values on the grid")
    return values


def field_from_symbol(grid: FrequencyGrid, f: Symbol) -> SpectralField:
    """Sample a symbol f(xi) (vectorized callable or node array) on the grid."""
    return SpectralField(grid, _sample(grid, f))


def hs_norm(u: SpectralField, s: SobolevIndex) -> float:
    if not math.isfinite(s):
        raise GridError(f"Sobolev index must be finite, got {s}")
    w = (1.0 + u.grid.xi**2) ** s
    return math.sqrt(float(np.dot(w, np.abs(u.coeffs) ** 2)) * u.grid.weight)


def l2_norm(u: SpectralField) -> float:
    return hs_norm(u, 0.0)


def apply_multiplier(u: SpectralField, m: Symbol) -> SpectralField:
    return SpectralField(u.grid, _sample(u.grid, m) * u.coeffs)


def propagator(grid: FrequencyGrid, t: float) -> np.ndarray:
    """Node values of exp(-i t phi(xi)), built from cos/sin so that -xi gives the exact conjugate."""
    angle = t * phi(grid.xi)
    return np.cos(angle) - 1j * np.sin(angle)


def semigroup(u: SpectralField, t: float) -> SpectralField:
    return SpectralField(u.grid, propagator(u.grid, t) * u.coeffs)


def support_radius(coeffs: np.ndarray, grid: FrequencyGrid, rtol: float = SUPPORT_RTOL) -> float:
    """Largest |xi_j| whose coefficient exceeds rtol * max |c|; 0 for the zero array."""
    mags = np.abs(coeffs)
    scale = float(np.max(mags, initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(grid.xi[mags > rtol * scale])))


def check_product_support(cu: np.ndarray, cv: np.ndarray, grid: FrequencyGrid,
                          rtol: float = SUPPORT_RTOL) -> None:
    ru = support_radius(cu, grid, rtol)
    rv = support_radius(cv, grid, rtol)
    if ru + rv > grid.xi_max + 1e-9 * grid.delta_xi:
        raise SupportOverflowError(
            f"product support {ru:g} + {rv:g} exceeds grid radius {grid.xi_max:g}; enlarge half_modes"
        )


def _pad(coeffs: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    m, n = grid.half_modes, grid.fft_length
    padded = np.zeros(n, dtype=np.complex128)
    padded[: m + 1] = coeffs[m:]
    padded[n - m:] = coeffs[:m]
    return padded


def convolve(cu: np.ndarray, cv: np.ndarray, grid: FrequencyGrid, real: bool = False) -> np.ndarray:
    """Spectrum of the pointwise product, truncated to the grid.

    Zero padding to ``grid.fft_length`` >= 2(2M+1) makes the discrete
    convolution exact.  ``real=True`` takes the real-transform path, valid when
    both inputs are Hermitian, and returns an exactly Hermitian spectrum.
    """
    m, n = grid.half_modes, grid.fft_length
    scale = grid.weight / SQRT_2PI * n
    out = np.empty(grid.size, dtype=np.complex128)
    if real:
        half = n // 2 + 1
        a = np.zeros(half, dtype=np.complex128)
        b = np.zeros(half, dtype=np.complex128)
        a[: m + 1] = cu[m:]
        b[: m + 1] = cv[m:]
        spectrum = sfft.rfft(sfft.irfft(a, n=n) * sfft.irfft(b, n=n))[: m + 1] * scale
        out[m:] = spectrum
        out[:m] = np.conj(spectrum[:0:-1])
    else:
        spectrum = sfft.fft(sfft.ifft(_pad(cu, grid)) * sfft.ifft(_pad(cv, grid))) * scale
        out[m:] = spectrum[: m + 1]
        out[:m] = spectrum[n - m:]
    return out


def quadratic_product(u: SpectralField, v: SpectralField, support_rtol: float = SUPPORT_RTOL) -> SpectralField:
    u._check_grid(v)
    check_product_support(u.coeffs, v.coeffs, u.grid, support_rtol)
    return SpectralField(u.grid, convolve(u.coeffs, v.coeffs, u.grid, real=u.hermitian and v.hermitian))


def restrict(u: SpectralField, xi_max: float) -> SpectralField:
    """Zero every coefficient with |xi| > xi_max."""
    keep = np.abs(u.grid.xi) <= xi_max + 1e-12
    return SpectralField(u.grid, np.where(keep, u.coeffs, 0.0))


def to_physical(u: SpectralField, n_points: Optional[int] = None) -> tuple:
    """Samples of u on the uniform lattice of one period; real values for Hermitian fields."""
    grid = u.grid
    n = n_points or grid.fft_length
    if n < grid.size:
        raise GridError(f"need at least {grid.size} sample points, got {n}")
    m = grid.half_modes
    padded = np.zeros(n, dtype=np.complex128)
    padded[: m + 1] = u.coeffs[m:]
    padded[n - m:] = u.coeffs[:m]
    values = sfft.ifft(padded) * (n * grid.weight / SQRT_2PI)
    x = np.arange(n) * (grid.period / n)
    return x, (values.real if u.hermitian else values)


def physical_l2_norm(u: SpectralField) -> float:
    x, values = to_physical(u)
    return math.sqrt(float(np.sum(np.abs(values) ** 2)) * u.grid.period / len(x))


def evaluate(u: SpectralField, x: np.ndarray) -> np.ndarray:
    """Inverse transform at arbitrary points (direct sum)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.exp(1j * np.outer(x, u.grid.xi)) @ u.coeffs * (u.grid.weight / SQRT_2PI)
    return values.real if u.hermitian else values


def relative_l2(a: SpectralField, b: SpectralField) -> float:
    """||a - b|| / ||b|| in L2, falling back to the absolute difference when b = 0."""
    diff = l2_norm(a - b)
    ref = l2_norm(b)
    return diff / ref if ref > 0 else diff
