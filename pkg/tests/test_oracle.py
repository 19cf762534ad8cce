"""fit_shift against an exhaustive 10^6-point scan on small noisy instances."""
import pytest

from oracle import brute_force
from shiftmatch import (DesignModel, SearchConfig, builtin_template, fit_shift, generate_shift,
                        make_rng, objective, parse_loss)
from shiftmatch.distributions import parse_noise


@pytest.mark.parametrize("name,loss", [("A", "absolute"), ("B", "tukey"), ("C", "squared"),
                                       ("D", "huber"), ("E", "squared")])
def test_matches_brute_force_scan(name, loss):
    tpl = builtin_template(name)
    L = parse_loss(loss)
    d = generate_shift(tpl, 0.03, DesignModel(), parse_noise("t:3"), 200, "random",
                       make_rng(77, ord(name)))
    lo, hi = -0.22, 0.28
    res = fit_shift(d, tpl, L, SearchConfig(param_bounds=(lo, hi)))
    t_grid, _, step, best_all = brute_force(d, tpl, L, lo, hi)
    assert objective(d, tpl, L, res.theta) <= best_all * (1 + 1e-12)
    if res.minimizer_interval_hint is None:
        assert abs(res.theta - t_grid) <= step
    else:
        lo_h, hi_h = res.minimizer_interval_hint
        assert lo_h - step <= t_grid <= hi_h + step
