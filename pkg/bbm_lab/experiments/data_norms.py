import logging

import numpy as np

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.experiments.common import (
    ExperimentResult,
    ResultRow,
    by_s,
    data_for,
    expected_l2,
    loglog_slope,
    map_rows,
    run_node,
)
from bbm_lab.initial_data import DataFamily
from bbm_lab.spectral import hs_norm, l2_norm
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.DATA_NORMS.value
L2_TOL = 0.02
SLOPE_TOL = 0.05
FLAT_SLOPE_TOL = 0.02
ZERO_MODE_TOL = 1e-14


def run_data_norms(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    grid = cfg.make_grid()
    scaled = cfg.family is DataFamily.BT_SCALED

    def measure(N):
        rows, zero_mode = [], 0.0
        for s in cfg.s_list:
            # the scaled family carries its own N^{-s} factor, so it is rebuilt per s
            h = data_for(cfg, grid, N, s if scaled else 0.0)
            zero_mode = max(zero_mode, abs(h.at(0.0)))
            rows.append(ResultRow(N=N, s=s, norm_data_hs=hs_norm(h, s), norm_data_l2=l2_norm(h)))
        return rows, zero_mode

    result = ExperimentResult()
    zero_mode = 0.0
    for rows, z in map_rows(measure, cfg.N_list, workers):
        result.rows.extend(rows)
        zero_mode = max(zero_mode, z)

    target = expected_l2(cfg)
    slopes = {}
    for s in cfg.s_list:
        picked = by_s(result.rows, s)
        l2 = np.array([r.norm_data_l2 for r in picked])
        if target is not None:
            worst = float(np.max(np.abs(l2 / target - 1.0)))
            result.check(EXPERIMENT, f"l2_constant[s={s:g}]", worst <= L2_TOL,
                         f"max deviation from {target:.4f}: {100 * worst:.2f}%")
        if len(picked) < 2:
            continue
        expected = 0.0 if scaled else s
        slope = loglog_slope([r.N for r in picked], [r.norm_data_hs for r in picked])
        slopes[f"{s:g}"] = slope
        tol = FLAT_SLOPE_TOL if s == 0 else SLOPE_TOL
        result.check(EXPERIMENT, f"hs_slope[s={s:g}]", abs(slope - expected) <= tol,
                     f"fitted slope {slope:.4f}, expected {expected:g}")
    if cfg.family is DataFamily.PERIODIC:
        result.check(EXPERIMENT, "zero_mode", zero_mode <= ZERO_MODE_TOL, f"max |h(0)| = {zero_mode:.1e}")

    result.diagnostics = {"slopes": slopes, "expected_l2": target, "grid_nodes": grid.size}
    return result


def data_norms_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_data_norms, state)
