import numpy as np
import pytest
from sklearn.base import clone

from shiftmatch import (Dataset, DesignModel, LocationScaleMEstimator, SearchConfig,
                        ShiftMEstimator, builtin_template, fit_location_scale,
                        fit_periodic_correlation, fit_shift, generate_location_scale,
                        generate_shift, make_rng, objective, parse_loss, piecewise_polynomial)
from shiftmatch.distributions import parse_noise
from shiftmatch.exceptions import (DegenerateBounds, EmptyDataset, InvalidBounds,
                                   NotRegularGrid)

U = DesignModel()
LOSSES = ("squared", "absolute", "huber", "tukey")


@pytest.mark.parametrize("loss", LOSSES)
def test_objective_zero_at_truth(zero_noise, loss):
    tpl = builtin_template("E")
    d = generate_shift(tpl, 0.07, U, zero_noise, 100, "random", make_rng(1))
    assert objective(d, tpl, parse_loss(loss), 0.07) == 0.0


def test_objective_single_point():
    d = Dataset([0.5], [2.0])
    assert objective(d, builtin_template("C"), parse_loss("squared"), 0.0) == 1.0


def test_objective_far_shift_is_loss_of_data():
    d = generate_shift(builtin_template("C"), 0.0, U, parse_noise("gaussian:1"), 50, "random",
                       make_rng(2))
    loss = parse_loss("huber")
    assert objective(d, builtin_template("C"), loss, 10.0) == pytest.approx(
        float(np.mean(loss.value(d.ys))), rel=1e-15)


def test_objective_empty():
    with pytest.raises(EmptyDataset):
        objective(Dataset([], []), builtin_template("A"), parse_loss("squared"), 0.0)


@pytest.mark.parametrize("loss", LOSSES)
def test_zero_noise_recovery_lipschitz(zero_noise, loss):
    tpl = builtin_template("A")
    d = generate_shift(tpl, 0.1, U, zero_noise, 300, "random", make_rng(3))
    cfg = SearchConfig(param_bounds=(-0.5, 0.5))
    res = fit_shift(d, tpl, parse_loss(loss), cfg)
    assert abs(res.theta - 0.1) <= cfg.refine_tol


def test_flat_minimum_hint_contains_truth(zero_noise):
    tpl = builtin_template("C")
    d = generate_shift(tpl, 0.0, U, zero_noise, 10, "random", make_rng(4))
    res = fit_shift(d, tpl, parse_loss("squared"), SearchConfig(param_bounds=(-0.5, 0.5)))
    lo, hi = res.minimizer_interval_hint
    assert lo <= 0.0 <= hi
    assert lo <= res.theta <= hi
    assert res.objective_at_min == 0.0
    assert res.midpoint == 0.5 * (lo + hi)


def test_fit_shift_is_deterministic():
    tpl = builtin_template("B")
    d = generate_shift(tpl, 0.02, U, parse_noise("t:3"), 500, "random", make_rng(5))
    a = fit_shift(d, tpl, parse_loss("tukey"))
    b = fit_shift(d, tpl, parse_loss("tukey"))
    assert a.theta == b.theta and a.evaluations == b.evaluations


def test_bounds_validation():
    d = Dataset([0.5], [1.0])
    with pytest.raises(DegenerateBounds):
        fit_shift(d, builtin_template("A"), parse_loss("squared"),
                  SearchConfig(param_bounds=(0.1, 0.1)))
    with pytest.raises(EmptyDataset):
        fit_shift(Dataset([], []), builtin_template("A"), parse_loss("squared"))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(coarse_grid_size=2)
    with pytest.raises(ValueError):
        SearchConfig(refine_tol=0)


def test_result_serialises():
    d = generate_shift(builtin_template("C"), 0.0, U, parse_noise("gaussian:1"), 200, "random",
                       make_rng(6))
    out = fit_shift(d, builtin_template("C"), parse_loss("absolute")).to_dict()
    assert set(out) >= {"theta", "objective_at_min", "evaluations", "minimizer_interval_hint"}


# ----------------------------------------------------------- location-scale

def _ls_data(params, n, noise, seed, tpl="C"):
    return generate_location_scale(builtin_template(tpl), params, U, parse_noise(noise)
                                   if isinstance(noise, str) else noise, n, "random",
                                   make_rng(seed))


def _same_gaps(xs, edges_a, edges_b):
    """True when each pair of edges falls in the same gap between sorted design points."""
    s = np.sort(xs)
    return all(np.searchsorted(s, a) == np.searchsorted(s, b) for a, b in zip(edges_a, edges_b))


@pytest.mark.parametrize("truth", [(1.0, 0.0, 1.0), (2.0, 0.05, 1.1)])
def test_location_scale_zero_noise(zero_noise, truth):
    tpl = builtin_template("C")
    d = _ls_data(truth, 500, zero_noise, 7)
    box = ((0.2, 5.0), (-0.25, 0.25), (0.5, 2.0))
    res = fit_location_scale(d, tpl, parse_loss("squared"), SearchConfig(param_bounds=box))
    beta, xi, nu = res.theta
    assert res.objective_at_min == pytest.approx(0.0, abs=1e-24)
    assert beta == pytest.approx(truth[0], abs=1e-7)
    # jump edges are identified only up to the gap between neighbouring design points
    est = [xi + nu * d_ for d_ in tpl.jump_locations]
    true = [truth[1] + truth[2] * d_ for d_ in tpl.jump_locations]
    assert _same_gaps(d.xs, est, true)


def test_location_scale_squared_inner_step():
    tpl = builtin_template("A")
    d = _ls_data((1.5, 0.0, 1.0), 400, "gaussian:1", 8, "A")
    box = ((-10.0, 10.0), (0.03, 0.03), (0.9, 0.9))
    res = fit_location_scale(d, tpl, parse_loss("squared"), SearchConfig(param_bounds=box))
    f = tpl.eval((d.xs - 0.03) / 0.9)
    assert res.theta[0] == pytest.approx(float(d.ys @ f / (f @ f)), rel=1e-12)


@pytest.mark.parametrize("name", ["A", "E"])
def test_location_scale_nests_shift_model(name):
    tpl = builtin_template(name)
    d = generate_shift(tpl, 0.04, U, parse_noise("gaussian:1"), 2000, "random", make_rng(9))
    loss = parse_loss("squared")
    cfg = SearchConfig(param_bounds=((1.0, 1.0), (-0.25, 0.25), (1.0, 1.0)))
    ls = fit_location_scale(d, tpl, loss, cfg)
    sh = fit_shift(d, tpl, loss, SearchConfig(param_bounds=(-0.25, 0.25)))
    assert ls.theta[0] == 1.0 and ls.theta[2] == 1.0
    assert ls.objective_at_min <= objective(d, tpl, loss, sh.theta) + 1e-12
    assert abs(ls.theta[1] - sh.theta) <= 1e-6


@pytest.mark.parametrize("loss", ["huber", "absolute"])
def test_location_scale_robust_losses(loss):
    d = _ls_data((1.0, 0.0, 1.0), 2000, "t:3", 10)
    res = fit_location_scale(d, builtin_template("C"), parse_loss(loss),
                             SearchConfig(param_bounds=((0.2, 5), (-0.25, 0.25), (0.5, 2))))
    beta, xi, nu = res.theta
    assert abs(beta - 1) < 0.2 and abs(xi) < 0.01 and abs(nu - 1) < 0.02


def test_location_scale_bad_box():
    d = _ls_data((1.0, 0.0, 1.0), 50, "gaussian:1", 11)
    with pytest.raises(InvalidBounds):
        fit_location_scale(d, builtin_template("C"), parse_loss("squared"),
                           SearchConfig(param_bounds=((0, 1), (0, 1), (-1, 1))))
    with pytest.raises(InvalidBounds):
        fit_location_scale(d, builtin_template("C"), parse_loss("squared"),
                           SearchConfig(param_bounds=((0, 1), (0, 1))))


# ------------------------------------------------------------------ periodic

def _periodic_data(tpl, theta, n, sigma, seed):
    xs = np.arange(1, n + 1) / n
    ys = tpl.shift_eval(xs, theta) + sigma * make_rng(seed).standard_normal(n)
    return Dataset(xs, ys)


def test_periodic_zero_noise_on_grid():
    tpl = builtin_template("C:periodic")
    res = fit_periodic_correlation(_periodic_data(tpl, 0.3, 100, 0.0, 0), tpl)
    assert res.extra["index"] == 30
    assert res.theta == pytest.approx(0.3, abs=1e-12)


def test_periodic_constant_signal_ties_to_first_index():
    tpl = piecewise_polynomial([((0.0, 0.5), [1.0]), ((0.5, 1.0), [-1.0])], periodic=True)
    n = 64
    d = Dataset(np.arange(1, n + 1) / n, np.full(n, 3.0))
    assert fit_periodic_correlation(d, tpl).extra["index"] == 1


def test_periodic_matches_least_squares_index():
    tpl = builtin_template("E:periodic")
    n = 80
    d = _periodic_data(tpl, 0.41, n, 0.5, 1)
    res = fit_periodic_correlation(d, tpl)
    i = np.arange(1, n + 1)
    ls = [np.sum((d.ys - tpl.eval((i - t) / n)) ** 2) for t in i]
    assert res.extra["index"] == int(np.argmin(ls)) + 1


def test_periodic_requires_regular_grid():
    tpl = builtin_template("C:periodic")
    with pytest.raises(NotRegularGrid):
        fit_periodic_correlation(Dataset([0.1, 0.7, 0.2], [0.0, 1.0, 0.0]), tpl)
    with pytest.raises(ValueError):
        fit_periodic_correlation(Dataset([0.5, 1.0], [0.0, 1.0]), builtin_template("C"))


# ------------------------------------------------------------------- sklearn

def test_shift_estimator_api():
    tpl = builtin_template("A")
    d = generate_shift(tpl, 0.05, U, parse_noise("gaussian:0.3"), 1000, "random", make_rng(12))
    est = ShiftMEstimator(template="A", loss="huber", bounds=(-0.25, 0.25))
    assert est.fit(d.xs.reshape(-1, 1), d.ys) is est
    assert abs(est.theta_ - 0.05) < 0.01
    assert est.n_features_in_ == 1
    np.testing.assert_allclose(est.predict(d.xs[:, None]), tpl.eval(d.xs - est.theta_))
    assert clone(est).get_params() == est.get_params()
    assert est.score(d.xs[:, None], d.ys) > 0.5


def test_location_scale_estimator_api():
    d = _ls_data((2.0, 0.02, 1.0), 2000, "gaussian:0.5", 13)
    est = LocationScaleMEstimator(template="C", box=((0.2, 5), (-0.25, 0.25), (0.5, 2)))
    est.fit(d.xs[:, None], d.ys)
    assert abs(est.beta_ - 2) < 0.1 and abs(est.xi_ - 0.02) < 0.005 and abs(est.nu_ - 1) < 0.01
    assert est.predict(d.xs[:, None]).shape == (2000,)


@pytest.mark.parametrize("name,loss", [("A", "huber"), ("C", "squared"), ("E", "absolute")])
def test_shift_equivariance(name, loss):
    tpl = builtin_template(name)
    L = parse_loss(loss)
    d = generate_shift(tpl, 0.02, U, parse_noise("gaussian:0.5"), 400, "random", make_rng(14))
    s = 0.375  # dyadic, so x + s is exact for these x
    moved = Dataset(d.xs + s, d.ys)
    a = fit_shift(d, tpl, L, SearchConfig(param_bounds=(-0.25, 0.25)))
    b = fit_shift(moved, tpl, L, SearchConfig(param_bounds=(-0.25 + s, 0.25 + s)))
    # grids and breakpoints are rebuilt in shifted coordinates, so agreement is to rounding
    assert b.theta - s == pytest.approx(a.theta, abs=1e-9)
    assert b.objective_at_min == pytest.approx(a.objective_at_min, rel=1e-12)
