import numpy as np
import pytest

from shiftmatch import (Dataset, DesignModel, builtin_template, generate_agnostic,
                        generate_location_scale, generate_shift, make_rng, parse_loss)
from shiftmatch.distributions import parse_noise
from shiftmatch.exceptions import InvalidScale

U = DesignModel()


def test_zero_noise_is_exact(zero_noise):
    c = builtin_template("A")
    d = generate_shift(c, 0.1, U, zero_noise, 50, "random", make_rng(0))
    np.testing.assert_array_equal(d.ys, c.eval(d.xs - 0.1))


def test_fixed_grid_cadlag_values(zero_noise):
    d = generate_shift(builtin_template("C"), 0.0, U, zero_noise, 3, "fixed", make_rng(0))
    np.testing.assert_array_equal(d.ys, [1.0, 1.0, 0.0])


def test_same_seed_same_data():
    noise = parse_noise("t:3")
    a = generate_shift(builtin_template("E"), 0.0, U, noise, 100, "random", make_rng(4))
    b = generate_shift(builtin_template("E"), 0.0, U, noise, 100, "random", make_rng(4))
    np.testing.assert_array_equal(a.xs, b.xs)
    np.testing.assert_array_equal(a.ys, b.ys)


def test_location_scale_identity_matches_shift():
    noise = parse_noise("gaussian:1")
    c = builtin_template("C")
    a = generate_location_scale(c, (1, 0, 1), U, noise, 100, "random", make_rng(5))
    b = generate_shift(c, 0.0, U, noise, 100, "random", make_rng(5))
    np.testing.assert_array_equal(a.ys, b.ys)


def test_location_scale_amplitude_and_shift(zero_noise):
    c = builtin_template("C")
    a = generate_location_scale(c, (2, 0, 1), U, zero_noise, 40, "random", make_rng(6))
    np.testing.assert_array_equal(a.ys, 2 * c.eval(a.xs))
    b = generate_location_scale(c, (1, 0.1, 1), U, zero_noise, 40, "random", make_rng(6))
    np.testing.assert_array_equal(b.ys, c.eval(b.xs - 0.1))


def test_location_scale_rejects_bad_scale(zero_noise):
    with pytest.raises(InvalidScale):
        generate_location_scale(builtin_template("C"), (1, 0, 0), U, zero_noise, 5, "random",
                                make_rng(0))


def test_agnostic():
    noise = parse_noise("gaussian:1")
    d = generate_agnostic(lambda x: np.zeros_like(x), U, noise, 30, "random", make_rng(7))
    z = make_rng(7)
    z.uniform(size=30)
    np.testing.assert_array_equal(d.ys, z.standard_normal(30))
    c = builtin_template("C")
    a = generate_agnostic(c.eval, U, noise, 30, "random", make_rng(8))
    b = generate_shift(c, 0.0, U, noise, 30, "random", make_rng(8))
    np.testing.assert_array_equal(a.ys, b.ys)


def test_agnostic_fixed_grid(zero_noise):
    d = generate_agnostic(lambda x: x + (x > 0.5), U, zero_noise, 3, "fixed", make_rng(0))
    np.testing.assert_allclose(d.ys, [0.25, 0.5, 1.75])


def test_csv_round_trip(tmp_path):
    d = generate_shift(builtin_template("B"), 0.0, U, parse_noise("gaussian:1"), 20, "random",
                       make_rng(9))
    d.to_csv(tmp_path / "d.csv")
    back = Dataset.from_csv(tmp_path / "d.csv")
    np.testing.assert_array_equal(back.xs, d.xs)
    np.testing.assert_array_equal(back.ys, d.ys)
