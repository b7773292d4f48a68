"""Second Picard iterate on the counterexample data: N-free size, restricted mass, time scaling."""
import logging

import numpy as np

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.errors import LabError
from bbm_lab.experiments.common import (
    ExperimentResult,
    ResultRow,
    by_s,
    data_for,
    low_band,
    map_rows,
    run_node,
    spread,
)
from bbm_lab.initial_data import DataFamily
from bbm_lab.picard import a_xi_set, i2_closed_form, i2_duhamel
from bbm_lab.spectral import GridMode, hs_norm, l2_norm, relative_l2, restrict
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.I2_INFLATION.value
ORACLE_TOL = 1e-6
INFLATION_SPREAD = 0.5
DOUBLING_RANGE = (1.5, 2.5)
DECAY_FRACTION = 0.85
ZERO_MODE_TOL = 1e-14


class OracleMismatch(LabError):
    pass


def _i2_pair(cfg: ExperimentConfig, grid, N: float) -> dict:
    h = data_for(cfg, grid, N)
    quad = i2_duhamel(h, cfg.t, cfg.quadrature.Q, cfg.support_rtol)
    exact = i2_closed_form(h, cfg.t, cfg.quadrature.refine, cfg.support_rtol)
    half = i2_closed_form(h, 0.5 * cfg.t, cfg.quadrature.refine, cfg.support_rtol)
    gap = relative_l2(quad, exact)
    if cfg.quadrature.refine == 1 and gap > ORACLE_TOL:
        raise OracleMismatch(f"N={N:g}: closed form and quadrature differ by {gap:.2e}")
    return {"h": h, "i2": quad, "i2_half": half, "gap": gap}


def run_i2_inflation(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    grid = cfg.make_grid()
    band = low_band(cfg)
    result = ExperimentResult()

    def compute(N):
        try:
            return N, _i2_pair(cfg, grid, N), None
        except OracleMismatch as e:
            return N, None, str(e)

    computed = map_rows(compute, cfg.N_list, workers)
    zero_mode = 0.0
    for N, pair, failure in computed:
        if failure is not None:
            result.check(EXPERIMENT, f"oracle[N={N:g}]", False, failure)
            log.warning("row N=%g aborted: %s", N, failure)
            continue
        h, i2, half = pair["h"], pair["i2"], pair["i2_half"]
        zero_mode = max(zero_mode, abs(i2.at(0.0)))
        low = restrict(i2, band)
        for s in cfg.s_list:
            total = hs_norm(i2, s)
            low_mass = hs_norm(low, s)
            half_norm = hs_norm(half, s)
            result.rows.append(ResultRow(
                N=N, s=s, t=cfg.t, eps=0.0,
                norm_data_hs=hs_norm(h, s), norm_data_l2=l2_norm(h), norm_I2_hs=total,
                method_discrepancy=pair["gap"],
                extras={
                    "low_mass": low_mass,
                    "low_share": low_mass / total if total else 0.0,
                    "norm_I2_half_t": half_norm,
                    "time_doubling": total / half_norm if half_norm else 0.0,
                },
            ))

    for s in cfg.s_list:
        picked = by_s(result.rows, s)
        if len(picked) < 2:
            continue
        tag = f"s={s:g}"
        i2 = [r.norm_I2_hs for r in picked]
        result.check(EXPERIMENT, f"inflation[{tag}]", spread(i2) >= INFLATION_SPREAD,
                     f"min/max of ||I2||_Hs = {spread(i2):.3f}")
        low = [r.extras["low_mass"] for r in picked]
        result.check(EXPERIMENT, f"low_band_mass[{tag}]", spread(low) >= INFLATION_SPREAD,
                     f"min/max of the |xi| <= {band:g} mass = {spread(low):.3f}, "
                     f"share {min(r.extras['low_share'] for r in picked):.3f}..{max(r.extras['low_share'] for r in picked):.3f}")
        data = [r.norm_data_hs for r in picked]
        decay = data[0] / data[-1]
        wanted = DECAY_FRACTION * (picked[-1].N / picked[0].N) ** (-s)
        result.check(EXPERIMENT, f"data_decay[{tag}]",
                     decay >= wanted and all(a > b for a, b in zip(data, data[1:])),
                     f"||h||_Hs falls by {decay:.3f} (need {wanted:.3f})")
        lo, hi = DOUBLING_RANGE
        doubling = [r.extras["time_doubling"] for r in picked]
        result.check(EXPERIMENT, f"time_doubling[{tag}]", all(lo <= d <= hi for d in doubling),
                     "t/2 -> t ratios " + ", ".join(f"{d:.3f}" for d in doubling))

    if cfg.grid.mode is GridMode.LINE and cfg.family is DataFamily.SHARP:
        measures = [a_xi_set(xi, N).measure for N in cfg.N_list for xi in np.linspace(-0.25, 0.25, 11)]
        result.check(EXPERIMENT, "a_xi_measure", min(measures) >= 1.0, f"min |A_xi| = {min(measures):.3f}")
    if cfg.grid.mode is GridMode.PERIODIC:
        result.check(EXPERIMENT, "zero_mode", zero_mode <= ZERO_MODE_TOL, f"max |I2(0)| = {zero_mode:.1e}")

    result.diagnostics = {
        "low_band": band,
        "oracle_gaps": {f"{N:g}": pair["gap"] for N, pair, _ in computed if pair is not None},
        "grid_nodes": grid.size,
    }
    return result


def i2_inflation_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_i2_inflation, state)
