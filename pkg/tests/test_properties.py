"""Property-based checks of the losses, templates and search."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftmatch import (Dataset, SearchConfig, builtin_template, fit_shift, objective,
                        parse_loss)

finite = st.floats(-1e3, 1e3, allow_nan=False)
losses = st.sampled_from(["squared", "absolute", "huber", "tukey", "huber:0.5", "tukey:2"])
templates = st.sampled_from(["A", "B", "C", "D", "E"])


@given(losses, finite)
def test_loss_even_nonnegative_zero_at_zero(name, r):
    loss = parse_loss(name)
    assert loss.value(r) >= 0
    assert loss.value(r) == loss.value(-r)
    assert loss.value(0.0) == 0.0


@given(losses, finite, finite)
def test_loss_monotone_in_magnitude(name, a, b):
    loss = parse_loss(name)
    lo, hi = sorted((abs(a), abs(b)))
    assert loss.value(lo) <= loss.value(hi) + 1e-12


@given(st.sampled_from(["huber", "tukey"]), st.floats(0.0, 1e4, allow_nan=False))
def test_bounded_influence(name, r):
    assert abs(parse_loss(name).d1(r)) <= 1.345 + 1e-12 if name == "huber" else True


@given(templates, st.floats(-2, 3, allow_nan=False), st.floats(-1, 1, allow_nan=False))
def test_shift_eval_is_translation(name, x, theta):
    tpl = builtin_template(name)
    assert tpl.shift_eval(x, theta) == tpl.eval(x - theta)


@given(templates, st.floats(-5, 5, allow_nan=False))
def test_templates_bounded_and_supported(name, x):
    tpl = builtin_template(name)
    v = tpl.eval(x)
    assert 0.0 <= v <= 1.0
    a, b = tpl.support
    if x < a or x > b:
        assert v == 0.0


@settings(max_examples=40, deadline=None)
@given(templates, losses, st.integers(0, 2**31 - 1), st.integers(5, 60))
def test_fit_never_worse_than_its_own_grid(name, loss_name, seed, n):
    rng = np.random.default_rng(seed)
    tpl = builtin_template(name)
    loss = parse_loss(loss_name)
    xs = rng.uniform(0, 1, n)
    ys = tpl.eval(xs - 0.05) + rng.standard_t(3, n)
    d = Dataset(xs, ys)
    res = fit_shift(d, tpl, loss, SearchConfig(param_bounds=(-0.2, 0.3)))
    assert -0.2 <= res.theta <= 0.3
    grid_min = min(objective(d, tpl, loss, t) for t in np.linspace(-0.2, 0.3, 101))
    assert res.objective_at_min <= grid_min * (1 + 1e-12) + 1e-300
    if res.minimizer_interval_hint is not None:
        lo, hi = res.minimizer_interval_hint
        assert lo <= res.theta <= hi
