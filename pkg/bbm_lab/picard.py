"""Duhamel operator, second Picard iterate (two routes) and the k-linear Picard recursion.

Normalization: the Duhamel operator carries -i/2,

    duhamel(v, w)(t) = -(i/2) int_0^t S(t - t') phi(D) [v w](t') dt',

and the reported second iterate is

    I_2 = 2 duhamel(S h, S h) = -i int_0^t S(t - t') phi(D) [S(t') h]^2 dt'.

The recursion I_k = sum over ordered pairs j+l=k of duhamel(I_j, I_l) yields the
Taylor coefficients of the flow of u_t = -i phi(D)(u + u^2/2) in eps, so its
second term is duhamel(I_1, I_1) = I_2 / 2.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import simpson

from bbm_lab.errors import GridError, QuadratureError, ResourceBudgetError
from bbm_lab.spectral import (
    SQRT_2PI,
    SUPPORT_RTOL,
    FrequencyGrid,
    GridMode,
    SpectralField,
    SobolevIndex,
    check_product_support,
    convolve,
    hermitian_deviation,
    hs_norm,
    is_hermitian,
    propagator,
    zeros,
)
from bbm_lab.symbols import phi, psi_kernel, theta_direct

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 25_000_000
_PAIR_CHUNK = 256


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Coefficient rows on a uniform time lattice 0 = t_0 < ... < t_Q."""

    grid: FrequencyGrid
    times: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) < 2 or times[0] != 0.0:
            raise QuadratureError("time lattice must start at 0 and hold at least two nodes")
        steps = np.diff(times)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise QuadratureError("time lattice must be strictly increasing and uniform")
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != (len(times), self.grid.size):
            raise GridError(f"trajectory shape {coeffs.shape} does not match {len(times)} x {self.grid.size}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def Q(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def hermitian(self) -> bool:
        return all(is_hermitian(row) for row in self.coeffs)

    def field(self, q: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[q])

    @property
    def fields(self) -> List[SpectralField]:
        return [self.field(q) for q in range(len(self.times))]

    @property
    def final(self) -> SpectralField:
        return self.field(-1)


@dataclass(frozen=True, eq=False)
class PicardExpansion:
    data: SpectralField
    t_final: float
    terms: List[SpectralField] = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.terms)

    def term(self, k: int) -> SpectralField:
        """I_k(t_final), 1-based."""
        return self.terms[k - 1]


def _check_lattice(Q: int) -> None:
    if Q < 8 or Q % 2:
        raise QuadratureError(f"Simpson quadrature needs an even node count Q >= 8, got {Q}")


def time_lattice(t_final: float, Q: int) -> np.ndarray:
    return np.linspace(0.0, t_final, Q + 1)


def free_trajectory(h: SpectralField, t_final: float, Q: int) -> Trajectory:
    times = time_lattice(t_final, Q)
    rows = np.stack([propagator(h.grid, t) * h.coeffs for t in times])
    return Trajectory(h.grid, times, rows)


def _duhamel_symbol(grid: FrequencyGrid) -> np.ndarray:
    # -(i/2) phi(xi): odd real times -i, so the symbol itself is Hermitian
    return -0.5j * phi(grid.xi)


def duhamel(v: Trajectory, w: Trajectory, t_final: float, support_rtol: float = SUPPORT_RTOL) -> SpectralField:
    if v.grid != w.grid:
        raise GridError("trajectories live on different grids")
    if not np.array_equal(v.times, w.times):
        raise QuadratureError("trajectories use different time lattices")
    if not math.isclose(v.times[-1], t_final, rel_tol=1e-12, abs_tol=1e-15):
        raise QuadratureError(f"lattice ends at {v.times[-1]}, expected {t_final}")
    _check_lattice(v.Q)
    grid = v.grid
    real = v.hermitian and w.hermitian
    symbol = _duhamel_symbol(grid)
    integrand = np.empty_like(v.coeffs)
    for q, t in enumerate(v.times):
        check_product_support(v.coeffs[q], w.coeffs[q], grid, support_rtol)
        product = convolve(v.coeffs[q], w.coeffs[q], grid, real=real)
        integrand[q] = propagator(grid, t_final - t) * (symbol * product)
    return SpectralField(grid, simpson(integrand, dx=v.dt, axis=0))


def i2_duhamel(h: SpectralField, t: float, Q: int = 256, support_rtol: float = SUPPORT_RTOL) -> SpectralField:
    """Second iterate by Simpson quadrature in time of the Duhamel integral."""
    if t < 0:
        raise QuadratureError(f"t must be nonnegative, got {t}")
    _check_lattice(Q)
    if t == 0:
        return zeros(h.grid)
    traj = free_trajectory(h, t, Q)
    return 2.0 * duhamel(traj, traj, t, support_rtol)


def _refined_values(h: SpectralField, refine: int) -> tuple:
    grid = h.grid
    if refine == 1:
        return grid.xi, h.coeffs
    fine = np.arange(-grid.half_modes * refine, grid.half_modes * refine + 1) * (grid.delta_xi / refine)
    values = np.interp(fine, grid.xi, h.coeffs.real) + 1j * np.interp(fine, grid.xi, h.coeffs.imag)
    return fine, values


def i2_closed_form(h: SpectralField, t: float, refine: int = 1, support_rtol: float = SUPPORT_RTOL) -> SpectralField:
    """Second iterate with the time integral done exactly.

    I_2(xi) = -i e^{-it phi(xi)} phi(xi) (w/sqrt(2 pi)) sum_{xi1} h(xi1) h(xi - xi1) t psi(-i t theta),

    summed over the lattice refined by ``refine`` (linear interpolation of h).
    With refine=1 this is the same discrete convolution quadratic_product uses.
    """
    if t < 0:
        raise QuadratureError(f"t must be nonnegative, got {t}")
    if int(refine) != refine or refine < 1:
        raise QuadratureError(f"refine must be a positive integer, got {refine}")
    grid = h.grid
    if t == 0:
        return zeros(grid)
    if grid.mode is GridMode.PERIODIC and refine != 1:
        raise QuadratureError("integer wavenumbers admit no refinement")
    check_product_support(h.coeffs, h.coeffs, grid, support_rtol)

    nodes, values = _refined_values(h, refine)
    half = (len(nodes) - 1) // 2
    support = np.flatnonzero(values)
    sums = np.zeros(2 * len(nodes) - 1, dtype=np.complex128)
    # output offset of xi1 + xi2 is (k - half) + (l - half) + 2 half = k + l
    for start in range(0, len(support), _PAIR_CHUNK):
        k = support[start: start + _PAIR_CHUNK][:, None]
        l = support[None, :]
        xi1 = nodes[k]
        xi_out = xi1 + nodes[l]
        kernel = t * psi_kernel(-1j * t * theta_direct((xi_out, xi1)))
        contrib = (values[k] * values[l] * kernel).ravel()
        index = (k + l).ravel()
        sums += np.bincount(index, weights=contrib.real, minlength=len(sums))
        sums += 1j * np.bincount(index, weights=contrib.imag, minlength=len(sums))

    centre = 2 * half
    offsets = np.arange(-grid.half_modes, grid.half_modes + 1) * refine + centre
    conv = sums[offsets] * (grid.weight / refine / SQRT_2PI)
    coeffs = -1j * propagator(grid, t) * phi(grid.xi) * conv
    return SpectralField(grid, coeffs)


@dataclass(frozen=True)
class AXiSet:
    intervals: tuple
    measure: float


def a_xi_set(xi: float, N: float) -> AXiSet:
    """Internal frequencies xi1 with xi1 in +-I_N and xi - xi1 in -+I_N, I_N = [N-1, N+1]."""
    if abs(xi) > 0.5:
        raise ValueError(f"the near-resonant set is defined for |xi| <= 1/2, got {xi}")
    candidates = [
        (max(N - 1, xi + N - 1), min(N + 1, xi + N + 1)),
        (max(-N - 1, xi - N - 1), min(-N + 1, xi - N + 1)),
    ]
    intervals = tuple((lo, hi) for lo, hi in candidates if hi >= lo)
    return AXiSet(intervals, float(sum(hi - lo for lo, hi in intervals)))


def picard_terms(h: SpectralField, t_final: float, K: int, Q: int = 256,
                 budget: int = DEFAULT_BUDGET, support_rtol: float = SUPPORT_RTOL) -> PicardExpansion:
    """I_1 .. I_K at t_final through the recursion on a shared time lattice.

    Interior integrals int_0^{t_q} use composite Simpson up to the last even
    node and one trapezoid panel at odd q.
    """
    if K < 2:
        raise QuadratureError(f"truncation order K must be >= 2, got {K}")
    _check_lattice(Q)
    grid = h.grid
    cells = grid.size * (Q + 1) * K
    if cells > budget:
        raise ResourceBudgetError(f"(2M+1)*(Q+1)*K = {cells:,} exceeds the budget {budget:,}")
    log.debug("picard_terms: %d nodes, Q=%d, K=%d", grid.size, Q, K)

    times = time_lattice(t_final, Q)
    dt = times[1] - times[0] if t_final > 0 else 0.0
    real = h.hermitian
    forward = np.stack([propagator(grid, t) for t in times])
    symbol = _duhamel_symbol(grid)

    trajectories = {1: forward * h.coeffs}
    terms = [SpectralField(grid, forward[-1] * h.coeffs)]
    for k in range(2, K + 1):
        integrand = np.empty((Q + 1, grid.size), dtype=np.complex128)
        for q in range(Q + 1):
            acc = np.zeros(grid.size, dtype=np.complex128)
            for j in range(1, k // 2 + 1):
                a, b = trajectories[j][q], trajectories[k - j][q]
                check_product_support(a, b, grid, support_rtol)
                product = convolve(a, b, grid, real=real)
                acc += product if 2 * j == k else 2.0 * product
            integrand[q] = np.conj(forward[q]) * (symbol * acc)
        cumulative = np.zeros_like(integrand)
        for q in range(1, Q + 1):
            if q % 2 == 0:
                cumulative[q] = cumulative[q - 2] + (dt / 3.0) * (integrand[q - 2] + 4.0 * integrand[q - 1] + integrand[q])
            else:
                cumulative[q] = cumulative[q - 1] + (dt / 2.0) * (integrand[q - 1] + integrand[q])
        if k < K:
            trajectories[k] = forward * cumulative
        terms.append(SpectralField(grid, forward[-1] * cumulative[-1]))
        if real and hermitian_deviation(terms[-1].coeffs) > 1e-12:
            log.warning("I_%d lost Hermitian symmetry (%.2e)", k, hermitian_deviation(terms[-1].coeffs))
    return PicardExpansion(h, t_final, terms)


def series_sum(expansion: PicardExpansion, eps: float, order: Optional[int] = None) -> SpectralField:
    """sum_{k=1}^{order} eps^k I_k(t_final); order defaults to K."""
    order = expansion.K if order is None else order
    total = zeros(expansion.data.grid)
    for k in range(1, order + 1):
        total = total + (eps**k) * expansion.term(k)
    return total


def tail_norm(expansion: PicardExpansion, eps: float, from_k: int, s: SobolevIndex) -> float:
    if from_k > expansion.K:
        return 0.0
    tail = zeros(expansion.data.grid)
    for k in range(max(from_k, 1), expansion.K + 1):
        tail = tail + (eps**k) * expansion.term(k)
    return hs_norm(tail, s)
