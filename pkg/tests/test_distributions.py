import math

import numpy as np
import pytest
from scipy import stats

from shiftmatch import DesignModel, NoiseModel, design_points, make_rng
from shiftmatch.distributions import noise_density, parse_noise, sample_noise
from shiftmatch.exceptions import ConfigError
from shiftmatch.experiments import ks_one_sample


def test_gaussian_mean():
    z = sample_noise(NoiseModel("gaussian", 1.0), make_rng(1), 100_000)
    assert abs(z.mean()) < 0.02


def test_empty_sample():
    assert sample_noise(NoiseModel("gaussian", 1.0), make_rng(1), 0).size == 0


def test_cauchy_median():
    z = sample_noise(parse_noise("cauchy"), make_rng(2), 100_000)
    assert abs(np.median(z)) < 0.02


def test_densities_at_zero():
    assert noise_density(parse_noise("gaussian:1"), 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert noise_density(parse_noise("cauchy"), 0.0) == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("text", ["gaussian:2", "t:3", "cauchy", "laplace:0.5"])
def test_density_even_and_scalar_form(text):
    noise = parse_noise(text)
    z = np.linspace(-6, 6, 49)
    np.testing.assert_allclose(noise.pdf(z), noise.pdf(-z))
    f = noise.scalar_pdf()
    np.testing.assert_allclose([f(v) for v in z], noise.pdf(z), rtol=1e-12)


def test_score_is_log_density_derivative():
    noise = parse_noise("t:3")
    z = np.linspace(-4, 4, 17)
    h = 1e-6
    fd = (np.log(noise.pdf(z + h)) - np.log(noise.pdf(z - h))) / (2 * h)
    np.testing.assert_allclose(noise.score(z), fd, atol=1e-7)


def test_variances():
    assert parse_noise("gaussian:2").variance == 4.0
    assert parse_noise("t:3").variance == pytest.approx(3.0)
    assert math.isinf(parse_noise("cauchy").variance)


def test_fixed_design():
    np.testing.assert_allclose(design_points(DesignModel(), "fixed", 3), [0.25, 0.5, 0.75])
    np.testing.assert_allclose(design_points(DesignModel(), "fixed", 1), [0.5])


def test_random_design_ks():
    x = design_points(DesignModel(), "random", 100_000, make_rng(3))
    assert ks_one_sample(x, stats.uniform.cdf) <= 0.006


@pytest.mark.parametrize("text", ["gaussian:0", "t:-1", "weibull:1", "gaussian:x"])
def test_bad_noise(text):
    with pytest.raises(ConfigError):
        parse_noise(text)


def test_bad_design():
    with pytest.raises(ConfigError):
        DesignModel.from_string("uniform:1,0")


def test_make_rng_streams():
    a = make_rng(7, 1, 2).standard_normal(4)
    b = make_rng(7, 1, 2).standard_normal(4)
    c = make_rng(7, 2, 1).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
