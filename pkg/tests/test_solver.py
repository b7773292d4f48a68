import math

import numpy as np
import pytest
from pydantic import ValidationError

from bbm_lab.errors import ConfigError, HermitianViolationError, QuadratureError, SupportOverflowError
from bbm_lab.initial_data import phi_sharp
from bbm_lab.picard import Trajectory
from bbm_lab.solver import (
    SolverConfig,
    evolve,
    invariant_h1,
    invariant_mean,
    observed_order,
    residual_ivp1,
    rhs,
    smooth_data,
)
from bbm_lab.spectral import SpectralField, l2_norm, zeros


@pytest.fixture
def u0(smooth_grid):
    return smooth_data(smooth_grid, amplitude=0.5)


def _final(u0, t, dt):
    cfg = SolverConfig.for_time(t, dt)
    return evolve(u0, cfg.model_copy(update={"store_every": cfg.n_steps})).final


def test_zero_is_a_fixed_point(smooth_grid):
    final = _final(zeros(smooth_grid), 1.0, 0.1)
    assert np.all(final.coeffs == 0)


def test_mean_is_conserved_exactly(u0):
    traj = evolve(u0, SolverConfig.for_time(1.0, 0.05))
    means = [invariant_mean(u) for u in traj.fields]
    assert max(abs(m - means[0]) for m in means) <= 1e-14


def test_h1_energy_drift_is_small(u0):
    final = _final(u0, 1.0, 0.01)
    start = invariant_h1(u0)
    assert abs(invariant_h1(final) - start) / start <= 1e-8


def test_rk4_converges_at_fourth_order(u0):
    reference = _final(u0, 1.0, 0.05 / 8)
    errors = [l2_norm(_final(u0, 1.0, dt) - reference) for dt in (0.1, 0.05)]
    assert observed_order(errors)[0] >= 3.8


def test_trajectory_satisfies_the_equation(u0):
    traj = evolve(u0, SolverConfig.for_time(0.5, 0.01))
    assert traj.Q == 50
    assert residual_ivp1(traj) <= 1e-8


def test_residual_needs_five_nodes(u0):
    traj = evolve(u0, SolverConfig.for_time(0.3, 0.1))
    with pytest.raises(QuadratureError):
        residual_ivp1(traj)


def test_backward_run_returns_to_the_data(u0):
    cfg = SolverConfig.for_time(1.0, 0.01)
    forward = evolve(u0, cfg)
    back = evolve(forward.final, cfg, backward=True)
    assert back.times[-1] == pytest.approx(1.0)
    assert np.all(np.diff(back.times) > 0)
    assert l2_norm(back.final - u0) <= 1e-8


def test_store_every_thins_the_trajectory(u0):
    traj = evolve(u0, SolverConfig(dt=0.05, n_steps=20, store_every=5))
    assert traj.Q == 4
    np.testing.assert_allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_rhs_vanishes_at_the_zero_mode(u0):
    du = rhs(u0)
    assert du.at(0.0) == 0
    assert du.hermitian


def test_solver_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(dt=0.2, n_steps=5)
    with pytest.raises(ValidationError):
        SolverConfig(dt=0.01, n_steps=10, store_every=3)
    with pytest.raises(ConfigError):
        SolverConfig.for_time(1.0, 0.03)
    assert SolverConfig.for_time(0.5, 1e-3).n_steps == 500


def test_complex_data_is_rejected(smooth_grid):
    coeffs = np.zeros(smooth_grid.size, dtype=complex)
    coeffs[smooth_grid.index(1.0)] = 1.0
    with pytest.raises(HermitianViolationError):
        evolve(SpectralField(smooth_grid, coeffs), SolverConfig(dt=0.01, n_steps=2))


def test_support_guard_stops_the_flow(line_grid):
    # boxes at |xi| <= 9 square into |xi| <= 18; the next square no longer fits xi_max = 20
    with pytest.raises(SupportOverflowError):
        evolve(phi_sharp(8.0, line_grid), SolverConfig(dt=0.01, n_steps=5))


def test_observed_order_edge_cases():
    assert observed_order([1e-3, 1e-3 / 16]) == [pytest.approx(4.0)]
    assert observed_order([1e-3, 0.0]) == [math.inf]
    assert observed_order([0.0, 1e-3]) == [0.0]


def test_trajectory_times_for_windows(u0):
    traj = evolve(u0, SolverConfig.for_time(0.1, 0.01))
    window = Trajectory(traj.grid, traj.times[4:] - traj.times[4], traj.coeffs[4:])
    assert window.Q == 6
    assert window.dt == pytest.approx(0.01)
