"""Flow map at the origin: small data in H^s, solutions whose low band keeps an N-free eps^2 size."""
import logging

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.experiments.common import ExperimentResult, ResultRow, by_s, data_for, map_rows, run_node, spread
from bbm_lab.picard import i2_closed_form
from bbm_lab.solver import SolverConfig, evolve
from bbm_lab.spectral import hs_norm, l2_norm, restrict, semigroup
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.DISCONTINUITY.value
LOWER_BOUND_FRACTION = 0.25
SPREAD_MIN = 0.5
HALVING_RANGE = (3.5, 4.5)
GROWTH_FRACTION = 0.8


def _rows_for(cfg: ExperimentConfig, grid, N: float) -> list:
    h = data_for(cfg, grid, N)
    i2 = i2_closed_form(h, cfg.t, cfg.quadrature.refine, cfg.support_rtol)
    linear = semigroup(h, cfg.t)
    solver_cfg = SolverConfig.for_time(cfg.t, cfg.solver.dt, support_rtol=cfg.support_rtol)
    solver_cfg = solver_cfg.model_copy(update={"store_every": solver_cfg.n_steps})
    rows = []
    for eps in (cfg.eps, 0.5 * cfg.eps):
        u = evolve(eps * h, solver_cfg).final
        residual = u - eps * linear - (0.5 * eps * eps) * i2
        # |xi| <= N/2 excludes the data boxes; what is left there is created by the nonlinearity
        low = restrict(u, 0.5 * N)
        for s in cfg.s_list:
            data_hs = hs_norm(h, s)
            u_hs = hs_norm(u, s)
            low_hs = hs_norm(low, s)
            scale = eps * data_hs
            rows.append(ResultRow(
                N=N, s=s, t=cfg.t, eps=eps,
                norm_data_hs=data_hs, norm_data_l2=l2_norm(h), norm_I2_hs=hs_norm(i2, s),
                norm_u_hs=u_hs, norm_residual_hs=hs_norm(residual, s),
                ratio_u_over_data=u_hs / scale if scale else 0.0,
                extras={"low_band_hs": low_hs, "low_over_data": low_hs / scale if scale else 0.0},
            ))
    log.debug("discontinuity rows for N=%g done", N)
    return rows


def run_discontinuity(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    grid = cfg.make_grid()
    result = ExperimentResult()
    for rows in map_rows(lambda N: _rows_for(cfg, grid, N), cfg.N_list, workers):
        result.rows.extend(rows)

    eps = cfg.eps
    growth = {}
    for s in cfg.s_list:
        picked = by_s(result.rows, s, eps)
        halved = by_s(result.rows, s, 0.5 * eps)
        tag = f"s={s:g}"
        floor = LOWER_BOUND_FRACTION * min(r.norm_I2_hs for r in picked) * eps * eps
        weakest = min(r.norm_u_hs for r in picked)
        result.check(EXPERIMENT, f"lower_bound[{tag}]", weakest >= floor,
                     f"min ||u||_Hs {weakest:.3e} vs (1/4) min ||I2|| eps^2 = {floor:.3e}")
        for full, small in zip(picked, halved):
            ratio = full.extras["low_band_hs"] / small.extras["low_band_hs"] if small.extras["low_band_hs"] else 0.0
            lo, hi = HALVING_RANGE
            result.check(EXPERIMENT, f"low_band_halving[N={full.N:g},{tag}]", lo <= ratio <= hi,
                         f"low-band ratio under eps-halving {ratio:.3f}")
        if len(picked) < 2:
            continue
        low = [r.extras["low_band_hs"] for r in picked]
        result.check(EXPERIMENT, f"low_band_spread[{tag}]", spread(low) >= SPREAD_MIN,
                     f"min/max of the low-band norm = {spread(low):.3f}")
        data = [eps * r.norm_data_hs for r in picked]
        result.check(EXPERIMENT, f"data_vanishes[{tag}]", all(a > b for a, b in zip(data, data[1:])),
                     f"||eps h||_Hs from {data[0]:.3e} to {data[-1]:.3e}")
        factor = picked[-1].extras["low_over_data"] / picked[0].extras["low_over_data"]
        wanted = GROWTH_FRACTION * (picked[-1].N / picked[0].N) ** (-s)
        growth[tag] = factor
        result.check(EXPERIMENT, f"low_band_growth[{tag}]", factor >= wanted,
                     f"low/||eps h|| grows by {factor:.3f} (need {wanted:.3f})")
        ratios = [r.ratio_u_over_data for r in picked]
        result.check(EXPERIMENT, f"ratio_monotone[{tag}]", all(b >= a for a, b in zip(ratios, ratios[1:])),
                     "ratio_u_over_data " + ", ".join(f"{r:.3f}" for r in ratios))

    result.diagnostics = {"low_band_growth": growth, "grid_nodes": grid.size}
    return result


def discontinuity_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_discontinuity, state)
