"""Noise and design distributions.

Densities and CDFs come from :mod:`scipy.stats`; sampling uses a caller
supplied :class:`numpy.random.Generator` so that every draw is tied to an
explicit seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import math

import numpy as np
from scipy import stats

from .exceptions import ConfigError

GAUSSIAN = "gaussian"
STUDENT_T = "t"
CAUCHY = "cauchy"
LAPLACE = "laplace"
DEGENERATE = "degenerate0"  # all-zero noise, for exact test oracles only

NOISE_KINDS = (GAUSSIAN, STUDENT_T, CAUCHY, LAPLACE)


@dataclass(frozen=True)
class NoiseModel:
    """Symmetric noise distribution.

    ``param`` is the standard deviation for Gaussian, the degrees of
    freedom for Student t, the scale ``b`` for Laplace and the scale for
    Cauchy (default 1).
    """

    kind: str
    param: Optional[float] = None

    def __post_init__(self):
        defaults = {GAUSSIAN: 1.0, STUDENT_T: 3.0, CAUCHY: 1.0, LAPLACE: 1.0,
                    DEGENERATE: 0.0}
        if self.kind not in defaults:
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        p = defaults[self.kind] if self.param is None else float(self.param)
        if self.kind != DEGENERATE and not (np.isfinite(p) and p > 0):
            raise ConfigError(f"{self.kind} parameter must be positive, got {p}")
        object.__setattr__(self, "param", p)

    @classmethod
    def from_string(cls, text: str) -> "NoiseModel":
        """Parse ``"gaussian:<sigma>"``, ``"t:<nu>"``, ``"cauchy"``, ``"laplace:<b>"``."""
        kind, _, arg = text.strip().lower().partition(":")
        kind = {"normal": GAUSSIAN, "student": STUDENT_T, "t3": STUDENT_T}.get(kind, kind)
        if kind not in NOISE_KINDS and kind != DEGENERATE:
            raise ConfigError(f"unknown noise {text!r}")
        try:
            return cls(kind, float(arg) if arg else None)
        except ValueError:
            raise ConfigError(f"bad noise parameter in {text!r}") from None

    def __str__(self) -> str:
        if self.kind == CAUCHY and self.param == 1.0:
            return CAUCHY
        return f"{self.kind}:{self.param:g}"

    @property
    def _dist(self):
        if self.kind == GAUSSIAN:
            return stats.norm(scale=self.param)
        if self.kind == STUDENT_T:
            return stats.t(df=self.param)
        if self.kind == CAUCHY:
            return stats.cauchy(scale=self.param)
        if self.kind == LAPLACE:
            return stats.laplace(scale=self.param)
        raise ValueError("degenerate noise has no density")

    @property
    def scale(self) -> float:
        """A natural scale used to map the real line onto a bounded interval."""
        return 1.0 if self.kind == STUDENT_T else self.param

    @property
    def heavy_tailed(self) -> bool:
        return self.kind in (STUDENT_T, CAUCHY)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.kind == GAUSSIAN:
            return self.param * rng.standard_normal(n)
        if self.kind == STUDENT_T:
            return rng.standard_t(self.param, n)
        if self.kind == CAUCHY:
            return self.param * rng.standard_cauchy(n)
        if self.kind == LAPLACE:
            return rng.laplace(0.0, self.param, n)
        return np.zeros(n)

    def pdf(self, z):
        return self._dist.pdf(z)

    def cdf(self, z):
        return self._dist.cdf(z)

    def scalar_pdf(self):
        """Closed-form density as a plain-float function (fast in quadrature loops)."""
        p = self.param
        if self.kind == GAUSSIAN:
            k = 1.0 / (p * math.sqrt(2.0 * math.pi))
            return lambda z: k * math.exp(-0.5 * (z / p) ** 2)
        if self.kind == STUDENT_T:
            k = math.exp(math.lgamma((p + 1) / 2) - math.lgamma(p / 2)) / math.sqrt(p * math.pi)
            return lambda z: k * (1.0 + z * z / p) ** (-(p + 1) / 2)
        if self.kind == CAUCHY:
            return lambda z: p / (math.pi * (p * p + z * z))
        if self.kind == LAPLACE:
            return lambda z: math.exp(-abs(z) / p) / (2.0 * p)
        raise ValueError("degenerate noise has no density")

    def score(self, z):
        """``phi'(z) / phi(z)``; 0 at the Laplace cusp."""
        z = np.asarray(z, dtype=float)
        p = self.param
        if self.kind == GAUSSIAN:
            out = -z / p ** 2
        elif self.kind == STUDENT_T:
            out = -(p + 1) * z / (p + z * z)
        elif self.kind == CAUCHY:
            out = -2 * z / (p * p + z * z)
        elif self.kind == LAPLACE:
            out = -np.sign(z) / p
        else:
            raise ValueError("degenerate noise has no density")
        return float(out) if out.ndim == 0 else out

    def pdf_deriv(self, z):
        """phi'(z); for Laplace the derivative at 0 is taken as 0."""
        return self.score(z) * self.pdf(z)

    @property
    def variance(self) -> float:
        """Second moment; ``inf`` when it does not exist."""
        if self.kind == GAUSSIAN:
            return self.param ** 2
        if self.kind == STUDENT_T:
            return self.param / (self.param - 2) if self.param > 2 else np.inf
        if self.kind == CAUCHY:
            return np.inf
        if self.kind == LAPLACE:
            return 2 * self.param ** 2
        return 0.0

    @property
    def fisher_location(self) -> float:
        """Closed-form location Fisher information ``int phi'^2 / phi``."""
        p = self.param
        if self.kind == GAUSSIAN:
            return 1 / p ** 2
        if self.kind == STUDENT_T:
            return (p + 1) / (p + 3)
        if self.kind == CAUCHY:
            return 1 / (2 * p * p)
        if self.kind == LAPLACE:
            return 1 / p ** 2
        return np.inf


def sample_noise(noise: NoiseModel, rng: np.random.Generator, n: int) -> np.ndarray:
    return noise.sample(rng, n)


def noise_density(noise: NoiseModel, z):
    return noise.pdf(z)


def parse_noise(text) -> NoiseModel:
    if isinstance(text, NoiseModel):
        return text
    return NoiseModel.from_string(text)


# -------------------------------------------------------------------- design

@dataclass(frozen=True)
class DesignModel:
    """Uniform design density on ``[a, b]``."""

    a: float = 0.0
    b: float = 1.0
    kind: str = "uniform"

    def __post_init__(self):
        if self.kind != "uniform":
            raise ConfigError(f"unknown design {self.kind!r}")
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ConfigError(f"bad uniform design support [{self.a}, {self.b}]")

    @classmethod
    def from_string(cls, text: str) -> "DesignModel":
        """Parse ``"uniform:a,b"`` (``"uniform"`` alone means ``[0, 1]``)."""
        kind, _, arg = text.strip().lower().partition(":")
        if kind != "uniform":
            raise ConfigError(f"unknown design {text!r}")
        if not arg:
            return cls()
        try:
            a, b = (float(v) for v in arg.split(","))
        except ValueError:
            raise ConfigError(f"bad design bounds in {text!r}") from None
        return cls(a, b)

    def __str__(self) -> str:
        return f"uniform:{self.a:g},{self.b:g}"

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        out = self.a + q * (self.b - self.a)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.a, self.b, n)


def design_points(design: DesignModel, mode: str, n: int,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Design points.

    ``random`` draws iid from the design density, ``fixed`` returns the
    quantile grid ``ppf(i / (n + 1))`` and ``periodic`` the regular grid
    ``i / n`` for ``i = 1..n`` used with periodic templates.
    """
    if mode == "random":
        if rng is None:
            raise ValueError("random design needs a generator")
        return design.sample(rng, n)
    if n < 1:
        raise ValueError("fixed design needs n >= 1")
    i = np.arange(1, n + 1)
    if mode == "fixed":
        return design.ppf(i / (n + 1))
    if mode == "periodic":
        return i / n
    raise ConfigError(f"unknown design mode {mode!r}")


def parse_design(text) -> DesignModel:
    if isinstance(text, DesignModel):
        return text
    return DesignModel.from_string(text)


def make_rng(seed, *keys) -> np.random.Generator:
    """Generator seeded from ``(seed, *keys)``.

    Deriving one stream per repeat index keeps Monte Carlo output independent
    of how repeats are scheduled across workers.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
