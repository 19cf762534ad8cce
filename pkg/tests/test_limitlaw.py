import numpy as np
import pytest

from shiftmatch import (DesignModel, MarkedProcessSpec, NoiseModel, builtin_template,
                        location_scale_limit_samples, location_scale_asymptotics, make_rng,
                        midpoint_sample, parse_loss, process_spec_for_template,
                        simulate_min_interval)
from shiftmatch.distributions import parse_noise
from shiftmatch.exceptions import ConfigError, NoDiscontinuity, WindowExplosion
from shiftmatch.experiments import ks_two_sample
from shiftmatch.limitlaw import sample_marks

U = DesignModel()
G = parse_noise("gaussian:1")
SQ = parse_loss("squared")


def _spec(name, loss=SQ, noise=G):
    return process_spec_for_template(builtin_template(name), U, loss, noise)


class _UnitMarks:
    """Loss whose increment is always +1, for the degenerate process."""

    kind = "unit"

    @staticmethod
    def value(r):
        return np.asarray(r, dtype=float) * 0.0 + (np.asarray(r) != 0)


def test_constant_positive_marks_pick_central_flat():
    # marks L(Z + 1) - L(Z) with Z = 0 and L(r) = 1{r != 0} are identically +1
    spec = MarkedProcessSpec(((1.0, 1.0),), NoiseModel("degenerate0"), _UnitMarks())
    rng = make_rng(3)
    iv = simulate_min_interval(spec, rng)
    # replay the same stream to locate the first events on each side
    replay = make_rng(3)
    T = iv.window_used
    first_right = np.sort(T * replay.uniform(size=replay.poisson(T)))
    assert iv.min_value == 0.0
    assert iv.upper == pytest.approx(first_right[0])
    assert iv.lower < 0 < iv.upper
    assert iv.midpoint == 0.5 * (iv.lower + iv.upper)


def test_template_c_spec_marks():
    spec = _spec("C")
    assert spec.components == ((1.0, 1.0), (1.0, -1.0))
    marks = sample_marks(spec, make_rng(4), 100_000)
    assert abs(marks.mean() - 1.0) < 0.02


def test_midpoints_symmetric():
    m = midpoint_sample(_spec("C"), 100_000, 5)
    assert abs(m.mean()) <= 3 * m.std() / np.sqrt(m.size)


def test_interval_invariants():
    spec = _spec("E", parse_loss("huber"), parse_noise("t:3"))
    for r in range(200):
        iv = simulate_min_interval(spec, make_rng(6, r))
        assert iv.lower <= iv.upper
        assert iv.min_value <= 0.0
        assert -iv.window_used / 2 < iv.lower and iv.upper < iv.window_used / 2


def test_single_repeat_is_reproducible():
    spec = _spec("D")
    one = midpoint_sample(spec, 1, 7)
    assert one[0] == simulate_min_interval(spec, make_rng(7, 0)).midpoint


def test_more_jumps_tighter_minimum():
    c = midpoint_sample(_spec("C"), 100_000, 8)
    d = midpoint_sample(_spec("D"), 100_000, 8)

    def iqr(x):
        q1, q3 = np.quantile(x, [0.25, 0.75])
        return q3 - q1

    assert iqr(d) < iqr(c)


def test_time_rescaling():
    spec = _spec("C")
    base = midpoint_sample(spec, 100_000, 9)
    fast = midpoint_sample(spec.scaled(2.0), 100_000, 10)
    assert ks_two_sample(2 * fast, base) <= 0.02


def test_location_scale_limit_samples():
    ls = location_scale_asymptotics(builtin_template("C"), U, SQ, G)
    assert sum(ls.xi_intensities) == 2.0
    assert sum(ls.nu_intensities) == 1.0
    xi, nu = location_scale_limit_samples(ls, 4000, 11)
    assert xi.shape == nu.shape == (4000,)
    assert abs(np.corrcoef(xi, nu)[0, 1]) <= 3 / np.sqrt(4000)


def test_spec_validation():
    with pytest.raises(NoDiscontinuity):
        _spec("A")
    with pytest.raises(NoDiscontinuity):
        MarkedProcessSpec((), G, SQ)
    with pytest.raises(ConfigError):
        MarkedProcessSpec(((0.0, 1.0),), G, SQ)


def test_negative_drift_is_reported():
    # absolute loss with a huge jump has positive drift; a zero jump has none
    spec = MarkedProcessSpec(((1.0, 0.0),), G, SQ)
    with pytest.raises(WindowExplosion):
        simulate_min_interval(spec, make_rng(12))
