import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lelplane import (ConvergenceError, DegenerateGeometryError, MinimizerConfig,
                      PlaneParams, entropy_like_cost, fit_least_entropy_like,
                      fit_least_squares, fit_ransac_plane, from_axis_explicit,
                      multi_start_points, relative_squared_residuals, residual,
                      residuals, to_axis_explicit)
from lelplane.planes import lel_cost

from .oracles import contaminated_plane, normal_equations_cramer


# -- residuals ---------------------------------------------------------------

@pytest.mark.parametrize("point, params, expected", [
    ((0, 0, 106), (0, 0, 1 / 106), 0.0),
    ((0, 0, 212), (0, 0, 1 / 106), 1.0),
    ((1, 2, 3), (1, 1, 1), 5.0),
])
def test_residual(point, params, expected):
    assert residual(point, PlaneParams(*params)) == pytest.approx(expected, abs=1e-15)


def test_plane_params_rejects_zero_and_nan():
    with pytest.raises(ValueError):
        PlaneParams(0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        PlaneParams(math.nan, 1.0, 0.0)


@pytest.mark.parametrize("res, expected", [
    ([1, 2], [0.2, 0.8]),
    ([3.3, 3.3, 3.3, 3.3], [0.25] * 4),
    ([2, 1, 1], [2 / 3, 1 / 6, 1 / 6]),
])
def test_relative_squared_residuals(res, expected):
    q = relative_squared_residuals(res)
    np.testing.assert_allclose(q, expected, rtol=1e-14)
    assert abs(q.sum() - 1.0) < 1e-12


def test_relative_squared_residuals_zero_sum():
    with pytest.raises(ValueError):
        relative_squared_residuals([0.0, 0.0])


# -- entropy-like cost ------------------------------------------------------

def test_entropy_examples():
    assert entropy_like_cost([5, 0, 0, 0]) == 0.0
    assert entropy_like_cost([3.7, 3.7, 3.7]) == pytest.approx(1.0, abs=1e-12)
    hand = -((2 / 3) * math.log(2 / 3) + 2 * (1 / 6) * math.log(1 / 6)) / math.log(3)
    assert entropy_like_cost([2, 1, 1]) == pytest.approx(hand, abs=1e-14)
    assert entropy_like_cost([2, 1, 1]) == pytest.approx(0.78969, abs=1e-4)


def test_entropy_zero_residuals_and_single():
    assert entropy_like_cost([0.0, 0.0, 0.0]) == 0.0
    assert entropy_like_cost([1e-12, -1e-12]) == 0.0
    with pytest.raises(ValueError):
        entropy_like_cost([1.0])


residual_lists = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=50)


@given(residual_lists)
def test_entropy_range(res):
    h = entropy_like_cost(res)
    assert 0.0 <= h <= 1.0


@given(residual_lists, st.floats(0.01, 100).flatmap(lambda c: st.sampled_from([c, -c])))
def test_entropy_scale_invariant(res, c):
    r = np.array(res)
    if np.dot(r, r) < 1e-6:
        return
    assert entropy_like_cost(c * r) == pytest.approx(entropy_like_cost(r), abs=1e-12)


@given(residual_lists, st.randoms())
def test_entropy_permutation_invariant(res, rnd):
    shuffled = list(res)
    rnd.shuffle(shuffled)
    assert entropy_like_cost(shuffled) == pytest.approx(entropy_like_cost(res), abs=1e-12)


# -- least squares ----------------------------------------------------------

def test_ls_exact_interpolation():
    p = fit_least_squares([(0, 0, 106), (1, 0, 106), (0, 1, 106)])
    np.testing.assert_allclose(p.theta, [0, 0, 1 / 106], atol=1e-15)
    p = fit_least_squares([(0, 157, 0), (1, 157, 0), (0, 157, 1), (1, 157, 1)])
    np.testing.assert_allclose(p.theta, [0, 1 / 157, 0], atol=1e-15)


def test_ls_noisy_plane_within_standard_errors():
    rng = np.random.default_rng(11)
    x = rng.uniform(-50, 50, 50)
    z = rng.uniform(-50, 50, 50)
    sigma = 0.1
    y = -0.03 * x + 0.14 * z + 155 + rng.normal(0, sigma, 50)
    pts = np.column_stack([x, y, z])
    a, b, c = to_axis_explicit(fit_least_squares(pts), "Y")
    # standard errors of the explicit-form regression y ~ [x, z, 1]
    design = np.column_stack([x, z, np.ones(50)])
    cov = sigma ** 2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.diag(cov))
    assert abs(a + 0.03) < 3 * se[0]
    assert abs(b - 0.14) < 3 * se[1]
    assert abs(c - 155) < 3 * se[2]
    # independent check of the normal equations themselves
    np.testing.assert_allclose(fit_least_squares(pts).theta, normal_equations_cramer(pts),
                               rtol=1e-9)


def test_ls_residual_orthogonal_to_columns():
    rng = np.random.default_rng(3)
    pts = rng.uniform(50, 150, (40, 3))
    p = fit_least_squares(pts)
    r = residuals(pts, p)
    assert np.all(np.abs(pts.T @ r) <= 1e-9 * np.abs(pts).sum(axis=0) * np.abs(r).max())


def test_ls_perturbation_never_decreases_cost():
    rng = np.random.default_rng(5)
    pts = np.column_stack([rng.uniform(-20, 20, 60), rng.uniform(-20, 20, 60),
                           106 + rng.normal(0, 0.5, 60)])
    theta = fit_least_squares(pts).theta
    d0 = np.sum((pts @ theta - 1) ** 2)
    for i in range(3):
        for sign in (1, -1):
            t = theta.copy()
            t[i] += sign * 1e-6
            assert np.sum((pts @ t - 1) ** 2) >= d0


@pytest.mark.parametrize("pts", [
    [(0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 0, 4)],           # collinear
    [(1, 2, 0), (3, -1, 0), (-2, 5, 0), (4, 4, 0)],         # plane z = 0 through origin
    [(1, 0, 0), (0, 1, 0)],                                  # too few
])
def test_ls_degenerate(pts):
    with pytest.raises(DegenerateGeometryError):
        fit_least_squares(pts)


# -- multi-start ------------------------------------------------------------

def test_multi_start_unit_z():
    starts = multi_start_points(PlaneParams(0, 0, 1))
    thetas = [s.theta for s in starts]
    assert len(starts) == 6
    np.testing.assert_array_equal(thetas[0], [0, 0, 1])
    np.testing.assert_array_equal(thetas[3], [0, 0, -1])
    for t in thetas:
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)
    assert abs(np.dot(thetas[1], thetas[0])) < 1e-15
    assert abs(np.dot(thetas[2], thetas[0])) < 1e-15


def test_multi_start_norms():
    for s in multi_start_points(PlaneParams(0, 1 / 157, 0)):
        assert s.norm == pytest.approx(1 / 157, abs=1e-12)


@given(st.tuples(*[st.floats(-10, 10, allow_nan=False)] * 3).filter(
    lambda t: np.linalg.norm(t) > 1e-6))
def test_multi_start_structure(t):
    starts = [s.theta for s in multi_start_points(np.array(t))]
    n = np.linalg.norm(t)
    for i in range(3):
        np.testing.assert_array_equal(starts[3 + i], -starts[i])
    for s in starts:
        assert np.linalg.norm(s) == pytest.approx(n, rel=1e-12)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert abs(np.dot(starts[i], starts[j])) <= 1e-12 * n * n


def test_multi_start_rejects_zero():
    with pytest.raises(ValueError):
        multi_start_points(np.zeros(3))


# -- LEL --------------------------------------------------------------------

def test_lel_exact_plane_reproduces_ls():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-30, 30, 30), rng.uniform(-30, 30, 30)])
    pts = np.column_stack([pts, 106 - 0.02 * pts[:, 0] + 0.01 * pts[:, 1]])
    ls = fit_least_squares(pts)
    lel = fit_least_entropy_like(pts)
    np.testing.assert_allclose(lel.params.theta, ls.theta, rtol=1e-6, atol=1e-6 * ls.norm)
    assert lel.cost == 0.0
    assert lel.start_index == 0


def test_lel_beats_ls_on_contaminated_plane():
    pts, _ = contaminated_plane(seed=42)
    ls_off = to_axis_explicit(fit_least_squares(pts), "Z")[2]
    lel = fit_least_entropy_like(pts)
    lel_off = to_axis_explicit(lel.params, "Z")[2]
    assert abs(lel_off - 106) < 0.5
    assert abs(ls_off - 106) > 1.0
    assert lel.cost == pytest.approx(lel_cost(lel.params, pts), abs=0)
    assert 0.0 <= lel.cost <= 1.0


def test_lel_cost_invariant_under_residual_scaling():
    # the cost depends on residual ratios only
    pts, _ = contaminated_plane(seed=1)
    theta = fit_least_entropy_like(pts).params.theta
    r = pts @ theta - 1
    assert entropy_like_cost(3.0 * r) == pytest.approx(entropy_like_cost(r), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_lel_dominates_ls_with_gross_outliers(seed):
    pts, _ = contaminated_plane(seed=100 + seed, n_in=90, n_out=10)
    ls_err = abs(to_axis_explicit(fit_least_squares(pts), "Z")[2] - 106)
    lel_err = abs(to_axis_explicit(fit_least_entropy_like(pts).params, "Z")[2] - 106)
    assert lel_err <= ls_err


def test_lel_needs_four_points():
    with pytest.raises(DegenerateGeometryError):
        fit_least_entropy_like([(0, 0, 1), (1, 0, 1), (0, 1, 1)])


def test_lel_no_convergence_carries_best():
    pts, _ = contaminated_plane(seed=3)
    with pytest.raises(ConvergenceError) as info:
        fit_least_entropy_like(pts, MinimizerConfig(max_iter=2))
    assert info.value.best is not None
    assert isinstance(info.value.best.params, PlaneParams)


def test_lel_parallel_matches_serial():
    pts, _ = contaminated_plane(seed=9)
    a = fit_least_entropy_like(pts, MinimizerConfig(workers=1))
    b = fit_least_entropy_like(pts, MinimizerConfig(workers=6))
    np.testing.assert_array_equal(a.params.theta, b.params.theta)
    assert a.start_index == b.start_index
    assert a.start_costs == b.start_costs


# -- RANSAC -----------------------------------------------------------------

def test_ransac_exact_plane():
    rng = np.random.default_rng(2)
    pts = np.column_stack([rng.uniform(-40, 40, (25, 2)), np.full(25, 106.0)])
    r = fit_ransac_plane(pts, threshold=0.5, trials=50, seed=1)
    assert r.inlier_count == 25
    np.testing.assert_allclose(r.params.theta, [0, 0, 1 / 106], atol=1e-9)


def test_ransac_contaminated():
    pts, _ = contaminated_plane(seed=42)
    r = fit_ransac_plane(pts, threshold=1.0, trials=300, seed=7)
    assert r.inlier_count >= 75
    assert abs(to_axis_explicit(r.params, "Z")[2] - 106) < 0.5


def test_ransac_three_points_interpolates():
    pts = np.array([(1.0, 2.0, 100.0), (-3.0, 5.0, 104.0), (7.0, -1.0, 98.0)])
    r = fit_ransac_plane(pts, threshold=0.1, trials=5, seed=0)
    assert r.inlier_count == 3
    np.testing.assert_allclose(residuals(pts, r.params), 0, atol=1e-12)


def test_ransac_deterministic_per_seed():
    pts, _ = contaminated_plane(seed=4)
    a = fit_ransac_plane(pts, 1.0, 100, seed=5)
    b = fit_ransac_plane(pts, 1.0, 100, seed=5)
    assert a.params == b.params and a.inlier_count == b.inlier_count


def test_ransac_argument_checks():
    pts = np.eye(3) + 1
    with pytest.raises(ValueError):
        fit_ransac_plane(pts, threshold=0, trials=1)
    with pytest.raises(ValueError):
        fit_ransac_plane(pts, threshold=1, trials=0)
    with pytest.raises(DegenerateGeometryError):
        fit_ransac_plane([(0, 0, 1), (0, 0, 2), (0, 0, 3)], threshold=1, trials=10)


# -- explicit forms ---------------------------------------------------------

def test_axis_explicit_examples():
    assert to_axis_explicit(PlaneParams(0, 1 / 157, 0), "Y") == pytest.approx((0, 0, 157))
    assert to_axis_explicit(PlaneParams(0, 0, 1 / 106), "Z") == pytest.approx((0, 0, 106))
    with pytest.raises(ValueError):
        to_axis_explicit(PlaneParams(0, 0, 1 / 106), "Y")


@pytest.mark.parametrize("coeffs, axis", [
    ((-0.05493, -0.002934, 157.808), "Y"),
    ((0.017388, 0.072053, 105.9031), "Z"),
])
def test_axis_explicit_round_trip(coeffs, axis):
    back = to_axis_explicit(from_axis_explicit(coeffs, axis), axis)
    np.testing.assert_allclose(back, coeffs, rtol=1e-12)
