"""Convergence, conservation, residual and reversibility checks of the RK4 flow on smooth data."""
import logging

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.experiments.common import ExperimentResult, run_node
from bbm_lab.solver import (
    MAX_DT,
    SolverConfig,
    evolve,
    invariant_h1,
    invariant_mean,
    observed_order,
    residual_ivp1,
    smooth_data,
)
from bbm_lab.spectral import l2_norm, zeros
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.SOLVER_VALIDATE.value
HORIZON = 1.0
ORDER_DTS = (0.1, 0.05)
REFERENCE_DIVISOR = 8
ORDER_MIN = 3.8
MEAN_TOL = 1e-14
H1_TOL = 1e-8
RESIDUAL_TOL = 1e-8
RETURN_TOL = 1e-8


def _final(u0, dt: float, rtol: float):
    cfg = SolverConfig.for_time(HORIZON, dt, support_rtol=rtol)
    return evolve(u0, cfg.model_copy(update={"store_every": cfg.n_steps})).final


def run_solver_validate(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    result = ExperimentResult()
    grid = cfg.make_grid()
    dt = cfg.solver.dt
    rtol = cfg.support_rtol
    u0 = smooth_data(grid, amplitude=cfg.amplitude)
    diagnostics = {"grid_nodes": grid.size, "dt": dt, "amplitude": cfg.amplitude}
    result.diagnostics = diagnostics

    if dt > MAX_DT:
        result.check(EXPERIMENT, "order", False, f"dt={dt:g} exceeds the accuracy limit {MAX_DT:g}; study not run")
        return result

    reference = _final(u0, ORDER_DTS[-1] / REFERENCE_DIVISOR, rtol)
    errors = [l2_norm(_final(u0, step, rtol) - reference) for step in ORDER_DTS]
    order = observed_order(errors, ratio=ORDER_DTS[0] / ORDER_DTS[1])[0]
    diagnostics.update({"order_dts": list(ORDER_DTS), "order_errors": errors, "order": order})
    result.check(EXPERIMENT, "order", order >= ORDER_MIN, f"observed order {order:.3f} from errors {errors}")

    run = SolverConfig.for_time(HORIZON, dt, support_rtol=rtol, conservation_check_every=100)
    traj = evolve(u0, run)
    final = traj.final
    mean_drift = abs(invariant_mean(final) - invariant_mean(u0))
    h1_start = invariant_h1(u0)
    h1_drift = abs(invariant_h1(final) - h1_start)
    if h1_start:
        h1_drift /= h1_start
    residual = residual_ivp1(traj, rtol)
    back = evolve(final, run.model_copy(update={"store_every": run.n_steps}), backward=True).final
    returned = l2_norm(back - u0)
    diagnostics.update({"mean_drift": mean_drift, "h1_drift": h1_drift, "residual": residual,
                        "return_error": returned})
    result.check(EXPERIMENT, "mean_drift", mean_drift <= MEAN_TOL, f"{mean_drift:.2e}")
    result.check(EXPERIMENT, "h1_drift", h1_drift <= H1_TOL, f"relative {h1_drift:.2e}")
    result.check(EXPERIMENT, "residual", residual <= RESIDUAL_TOL, f"max residual {residual:.2e}")
    result.check(EXPERIMENT, "time_reversal", returned <= RETURN_TOL, f"return error {returned:.2e}")

    still = _final(zeros(grid), dt, rtol)
    peak = float(abs(still.coeffs).max())
    result.check(EXPERIMENT, "zero_fixed_point", peak == 0.0, f"max |u| = {peak:.1e}")
    log.debug("solver validation: order %.3f, h1 drift %.2e", order, h1_drift)
    return result


def solver_validate_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_solver_validate, state)
