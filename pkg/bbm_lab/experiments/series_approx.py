"""Picard series against the full RK4 flow: cubic residual, tail scaling and agreement."""
import logging

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.experiments.common import ExperimentResult, ResultRow, by_s, data_for, map_rows, run_node
from bbm_lab.picard import picard_terms, series_sum, tail_norm
from bbm_lab.solver import SolverConfig, evolve
from bbm_lab.spectral import hs_norm, l2_norm
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.SERIES_APPROX.value
HALVING_MIN = 7.0
HALVING_MAX = 9.0
DOMINANCE = 0.1
AGREEMENT_TOL = 1e-5
TAIL_FROM = 3


def _flow(h, eps: float, cfg: ExperimentConfig):
    solver_cfg = SolverConfig.for_time(cfg.t, cfg.solver.dt, support_rtol=cfg.support_rtol)
    solver_cfg = solver_cfg.model_copy(update={"store_every": solver_cfg.n_steps})
    return evolve(eps * h, solver_cfg).final


def _rows_for(cfg: ExperimentConfig, grid, N: float) -> list:
    h = data_for(cfg, grid, N)
    expansion = picard_terms(h, cfg.t, cfg.K, cfg.quadrature.Q, cfg.budget, cfg.support_rtol)
    # term(2) is the flow coefficient I_2 / 2
    linear, quadratic = expansion.term(1), expansion.term(2)
    rows = []
    for eps in (cfg.eps, 0.5 * cfg.eps):
        u = _flow(h, eps, cfg)
        residual = u - eps * linear - (eps * eps) * quadratic
        agreement = l2_norm(series_sum(expansion, eps) - u)
        for s in cfg.s_list:
            data_hs = hs_norm(h, s)
            u_hs = hs_norm(u, s)
            rows.append(ResultRow(
                N=N, s=s, t=cfg.t, eps=eps,
                norm_data_hs=data_hs, norm_data_l2=l2_norm(h),
                norm_I2_hs=hs_norm(2.0 * quadratic, s), norm_u_hs=u_hs,
                norm_residual_hs=hs_norm(residual, s),
                ratio_u_over_data=u_hs / (eps * data_hs) if eps > 0 else 0.0,
                method_discrepancy=agreement,
                extras={
                    "tail_norm": tail_norm(expansion, eps, TAIL_FROM, s),
                    **{f"norm_I{k}_hs": hs_norm(expansion.term(k), s) for k in range(1, expansion.K + 1)},
                },
            ))
    log.debug("series rows for N=%g done", N)
    return rows


def run_series_approx(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    grid = cfg.make_grid()
    result = ExperimentResult()
    for rows in map_rows(lambda N: _rows_for(cfg, grid, N), cfg.N_list, workers):
        result.rows.extend(rows)

    eps, half = cfg.eps, 0.5 * cfg.eps
    if eps == 0:
        worst = max((r.norm_residual_hs + r.norm_u_hs for r in result.rows), default=0.0)
        result.check(EXPERIMENT, "zero_data", worst == 0.0, f"max residual {worst:.1e}")
        result.diagnostics = {"grid_nodes": grid.size}
        return result

    halving = {}
    for s in cfg.s_list:
        for full, small in zip(by_s(result.rows, s, eps), by_s(result.rows, s, half)):
            tag = f"N={full.N:g},s={s:g}"
            ratio = full.norm_residual_hs / small.norm_residual_hs if small.norm_residual_hs else float("inf")
            halving[tag] = ratio
            result.check(EXPERIMENT, f"residual_halving[{tag}]", HALVING_MIN <= ratio <= HALVING_MAX,
                         f"residual ratio under eps-halving {ratio:.3f}")
            tail = full.extras["tail_norm"] / small.extras["tail_norm"] if small.extras["tail_norm"] else float("inf")
            result.check(EXPERIMENT, f"tail_halving[{tag}]", HALVING_MIN <= tail <= HALVING_MAX,
                         f"tail ratio under eps-halving {tail:.3f}")
            bound = DOMINANCE * eps * eps * full.norm_I2_hs
            result.check(EXPERIMENT, f"quadratic_dominance[{tag}]", full.norm_residual_hs < bound,
                         f"residual {full.norm_residual_hs:.3e} vs {bound:.3e}")
            # ||r||_Hs <= ||tail||_Hs + ||u - series||_L2 for s <= 0
            slack = full.extras["tail_norm"] + full.method_discrepancy + 1e-14
            result.check(EXPERIMENT, f"tail_bound[{tag}]", full.norm_residual_hs <= slack,
                         f"residual {full.norm_residual_hs:.3e}, tail {full.extras['tail_norm']:.3e}")
    for row in by_s(result.rows, cfg.s_list[0]):
        result.check(EXPERIMENT, f"series_vs_solver[N={row.N:g},eps={row.eps:g}]",
                     row.method_discrepancy <= AGREEMENT_TOL, f"L2 gap {row.method_discrepancy:.3e}")

    result.diagnostics = {"residual_halving": halving, "grid_nodes": grid.size, "K": cfg.K}
    return result


def series_approx_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_series_approx, state)
