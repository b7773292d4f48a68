import math

import numpy as np
import pytest

from bbm_lab.errors import GridError, QuadratureError, ResourceBudgetError
from bbm_lab.initial_data import phi_sharp
from bbm_lab.picard import (
    Trajectory,
    a_xi_set,
    duhamel,
    free_trajectory,
    i2_closed_form,
    i2_duhamel,
    picard_terms,
    series_sum,
    tail_norm,
)
from bbm_lab.solver import observed_order
from bbm_lab.spectral import SpectralField, hs_norm, l2_norm, make_grid, relative_l2, semigroup


@pytest.fixture
def data(line_grid):
    return phi_sharp(8.0, line_grid)


def test_closed_form_matches_quadrature(data):
    quad = i2_duhamel(data, 0.5, Q=256)
    exact = i2_closed_form(data, 0.5)
    assert relative_l2(quad, exact) <= 1e-8


def test_simpson_converges_at_fourth_order(data):
    exact = i2_closed_form(data, 1.0)
    errors = [relative_l2(i2_duhamel(data, 1.0, Q=Q), exact) for Q in (8, 16, 32)]
    assert all(order >= 3.5 for order in observed_order(errors))


def test_second_iterate_structure(data):
    i2 = i2_closed_form(data, 0.5)
    assert i2.hermitian
    assert i2.at(0.0) == 0
    np.testing.assert_allclose(i2_closed_form(2.0 * data, 0.5).coeffs, 4.0 * i2.coeffs, atol=1e-13)
    # output lives near |xi| <= 2 and near |xi| = 2N only
    mid = np.abs(data.grid.xi)
    assert np.all(i2.coeffs[(mid > 2.0) & (mid < 14.0)] == 0)


def test_second_iterate_grows_linearly_for_small_times(data):
    small = hs_norm(i2_closed_form(data, 0.01), -0.5)
    double = hs_norm(i2_closed_form(data, 0.02), -0.5)
    assert double / small == pytest.approx(2.0, rel=1e-2)


def test_zero_time_and_bad_arguments(data):
    assert l2_norm(i2_closed_form(data, 0.0)) == 0.0
    assert l2_norm(i2_duhamel(data, 0.0)) == 0.0
    with pytest.raises(QuadratureError):
        i2_duhamel(data, 0.5, Q=33)
    with pytest.raises(QuadratureError):
        i2_duhamel(data, 0.5, Q=6)
    with pytest.raises(QuadratureError):
        i2_closed_form(data, 0.5, refine=0)
    with pytest.raises(QuadratureError):
        i2_closed_form(data, -1.0)


def test_refined_lattice_stays_close(data):
    coarse = i2_closed_form(data, 0.5)
    fine = i2_closed_form(data, 0.5, refine=2)
    # interpolating a box adds half-height edge nodes, a small relative change
    assert relative_l2(fine, coarse) < 0.2


def test_duhamel_rejects_mismatched_lattices(data):
    a = free_trajectory(data, 0.5, 16)
    b = free_trajectory(data, 0.5, 32)
    with pytest.raises(QuadratureError):
        duhamel(a, b, 0.5)
    with pytest.raises(QuadratureError):
        duhamel(a, a, 0.4)


def test_trajectory_validation(data):
    with pytest.raises(QuadratureError):
        Trajectory(data.grid, np.array([0.1, 0.2]), np.zeros((2, data.grid.size)))
    with pytest.raises(QuadratureError):
        Trajectory(data.grid, np.array([0.0, 0.1, 0.3]), np.zeros((3, data.grid.size)))
    with pytest.raises(GridError):
        Trajectory(data.grid, np.array([0.0, 0.1]), np.zeros((2, 5)))


def test_picard_terms_reproduce_the_first_two_iterates():
    grid = make_grid(160, 0.25)  # room for four-fold products of N = 8 data
    h = phi_sharp(8.0, grid)
    expansion = picard_terms(h, 0.5, K=4, Q=128)
    assert expansion.K == 4
    np.testing.assert_allclose(expansion.term(1).coeffs, semigroup(h, 0.5).coeffs, atol=1e-15)
    assert relative_l2(2.0 * expansion.term(2), i2_closed_form(h, 0.5)) <= 1e-8
    assert all(term.hermitian for term in expansion.terms)


def test_series_sum_and_tail():
    grid = make_grid(160, 0.25)
    expansion = picard_terms(phi_sharp(8.0, grid), 0.5, K=4, Q=64)
    assert l2_norm(series_sum(expansion, 0.0)) == 0.0
    eps = 0.05
    partial = series_sum(expansion, eps, order=2)
    full = series_sum(expansion, eps)
    assert math.isclose(l2_norm(full - partial), tail_norm(expansion, eps, 3, 0.0), rel_tol=1e-12)
    assert tail_norm(expansion, eps, 5, -0.5) == 0.0
    halving = tail_norm(expansion, eps, 3, -0.5) / tail_norm(expansion, 0.5 * eps, 3, -0.5)
    assert 7.0 <= halving <= 9.0


def test_picard_budget():
    grid = make_grid(160, 0.25)
    with pytest.raises(ResourceBudgetError):
        picard_terms(phi_sharp(8.0, grid), 0.5, K=4, Q=64, budget=1000)
    with pytest.raises(QuadratureError):
        picard_terms(phi_sharp(8.0, grid), 0.5, K=1)


@pytest.mark.parametrize("xi, measure", [(0.0, 4.0), (0.25, 3.5), (-0.5, 3.0)])
def test_near_resonant_set(xi, measure):
    assert a_xi_set(xi, 16.0).measure == pytest.approx(measure)
    assert len(a_xi_set(xi, 16.0).intervals) == 2


def test_near_resonant_set_domain():
    with pytest.raises(ValueError):
        a_xi_set(0.75, 16.0)


def _mode_pair(grid, xi0):
    c = np.zeros(grid.size)
    c[grid.index(xi0)] = c[grid.index(-xi0)] = 1.0
    return SpectralField(grid, c)


def _random_field(grid, radius, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)
    c = 0.5 * (c + np.conj(c[::-1]))
    c[np.abs(grid.xi) > radius] = 0.0
    return SpectralField(grid, c)


def _outside(field, frequencies):
    keep = np.zeros(field.grid.size, dtype=bool)
    for xi in frequencies:
        keep[field.grid.index(xi)] = True
    return np.max(np.abs(field.coeffs[~keep])) / np.max(np.abs(field.coeffs))


def test_duhamel_is_symmetric_and_bilinear(data):
    v = free_trajectory(data, 0.5, 32)
    w = free_trajectory(_random_field(data.grid, 6.0, seed=1), 0.5, 32)
    v2 = free_trajectory(_random_field(data.grid, 5.0, seed=2), 0.5, 32)
    vw = duhamel(v, w, 0.5)
    scale = np.max(np.abs(vw.coeffs))
    np.testing.assert_allclose(duhamel(w, v, 0.5).coeffs, vw.coeffs, rtol=0, atol=1e-13 * scale)
    for alpha in (1.5, 0.5 - 2.0j):
        mixed = Trajectory(v.grid, v.times, alpha * v.coeffs + v2.coeffs)
        expected = alpha * vw + duhamel(v2, w, 0.5)
        np.testing.assert_allclose(duhamel(mixed, w, 0.5).coeffs, expected.coeffs,
                                   rtol=0, atol=1e-13 * abs(alpha) * scale)


def test_higher_iterates_vanish_at_zero_frequency():
    grid = make_grid(160, 0.25)
    h = _random_field(grid, 4.0, seed=3)
    assert h.at(0.0) != 0
    expansion = picard_terms(h, 0.5, K=4, Q=32)
    assert expansion.term(1).at(0.0) != 0
    assert all(expansion.term(k).at(0.0) == 0 for k in range(2, 5))


def test_single_mode_pair_generates_harmonics(line_grid):
    xi0 = 2.0
    h = _mode_pair(line_grid, xi0)
    i2 = i2_duhamel(h, 0.5, Q=64)
    assert l2_norm(i2) > 0
    assert _outside(i2, [0.0, 2 * xi0, -2 * xi0]) <= 1e-12
    cubic = picard_terms(h, 0.5, K=3, Q=64).term(3)
    assert l2_norm(cubic) > 0
    assert _outside(cubic, [xi0, -xi0, 3 * xi0, -3 * xi0]) <= 1e-12
