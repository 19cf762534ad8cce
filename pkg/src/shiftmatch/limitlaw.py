"""Minimiser of a two-sided marked Poisson step process.

For a template with jumps, ``n (theta_hat - theta*)`` settles on the flat
minimum of ``W(t) = sum of marks of events between 0 and t``. Events arrive at
rate ``sum_k lambda_k`` on each half-line; an event from component ``k``
carries the mark ``L(Z + jump_k) - L(Z)`` (``-jump_k`` on the negative side,
which has the same law for symmetric noise).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .distributions import DesignModel, NoiseModel, make_rng
from .exceptions import ConfigError, NoDiscontinuity, WindowExplosion
from .losses import Loss
from .templates import Template

MAX_DOUBLINGS = 20
# a walk with drift mu and step variance s2 ever falls M below its value with
# probability about exp(-2 mu M / s2); M is chosen so that this is RUIN_PROB
RUIN_PROB = 1e-8
_MARK_PROBE = 200_000


@dataclass(frozen=True)
class MarkedProcessSpec:
    """Components ``(intensity, jump)`` plus the noise and loss that form marks."""

    components: Tuple[Tuple[float, float], ...]
    noise: NoiseModel
    loss: Loss

    def __post_init__(self):
        comps = tuple((float(r), float(j)) for r, j in self.components)
        if not comps:
            raise NoDiscontinuity("a marked process needs at least one component")
        for r, _ in comps:
            if not (np.isfinite(r) and r > 0):
                raise ConfigError(f"component intensities must be positive, got {r}")
        object.__setattr__(self, "components", comps)

    @property
    def total_intensity(self) -> float:
        return float(sum(r for r, _ in self.components))

    def mark_moments(self) -> Tuple[float, float]:
        """Mean and variance of one mark, from a fixed-seed probe sample."""
        cached = self.__dict__.get("_moments")
        if cached is None:
            m = sample_marks(self, np.random.default_rng(0), _MARK_PROBE)
            cached = (float(m.mean()), float(m.var()))
            object.__setattr__(self, "_moments", cached)
        return cached

    def safety_margin(self) -> float:
        """Height above the running minimum that makes a later undercut negligible."""
        mu, var = self.mark_moments()
        if not mu > 0:
            raise WindowExplosion(f"marks have non-positive mean {mu:.3g}; no finite minimiser")
        return var / (2.0 * mu) * np.log(1.0 / RUIN_PROB)

    def scaled(self, factor: float) -> "MarkedProcessSpec":
        """Same marks, all intensities multiplied by ``factor``."""
        return MarkedProcessSpec(tuple((r * factor, j) for r, j in self.components),
                                 self.noise, self.loss)


def process_spec_for_template(template: Template, design: DesignModel, loss: Loss,
                              noise: NoiseModel, theta_star: float = 0.0) -> MarkedProcessSpec:
    """Limit process of ``n (theta_hat - theta*)`` for a template with jumps."""
    comps = []
    for d, j in template.discontinuities:
        lam = float(design.pdf(d + theta_star))
        if lam > 0:
            comps.append((lam, j))
    if not comps:
        raise NoDiscontinuity(f"template {template.name} has no jump on the design support")
    return MarkedProcessSpec(tuple(comps), noise, loss)


def sample_marks(spec: MarkedProcessSpec, rng: np.random.Generator, m: int,
                 sign: float = 1.0) -> np.ndarray:
    """``m`` marks of the superposed process (``sign`` flips the jumps)."""
    rates = np.array([r for r, _ in spec.components])
    jumps = np.array([j for _, j in spec.components])
    k = rng.choice(len(rates), size=m, p=rates / rates.sum()) if len(rates) > 1 else np.zeros(m, int)
    z = spec.noise.sample(rng, m)
    return spec.loss.value(z + sign * jumps[k]) - spec.loss.value(z)


@dataclass(frozen=True)
class MinimizerInterval:
    lower: float
    upper: float
    midpoint: float
    min_value: float
    window_used: float


class _Side:
    """Events on one half-line, extended on demand."""

    def __init__(self, spec, rng, sign):
        self.spec, self.rng, self.sign = spec, rng, sign
        self.times = np.empty(0)
        self.marks = np.empty(0)
        self.horizon = 0.0

    def extend(self, T):
        span = T - self.horizon
        m = int(self.rng.poisson(self.spec.total_intensity * span))
        t = np.sort(self.horizon + span * self.rng.uniform(size=m))
        self.times = np.concatenate((self.times, t))
        self.marks = np.concatenate((self.marks, sample_marks(self.spec, self.rng, m, self.sign)))
        self.horizon = T


def _side_minimum(times, marks, T):
    """Min over flats after the first event: (value, first start, last end)."""
    if times.size == 0:
        return np.inf, None, None
    w = np.cumsum(marks)
    m = float(w.min())
    hit = np.flatnonzero(w == m)
    ends = np.append(times[1:], T)
    return m, float(times[hit[0]]), float(ends[hit[-1]])


def simulate_min_interval(spec: MarkedProcessSpec, rng: np.random.Generator) -> MinimizerInterval:
    """Closed flat on which the two-sided process attains its minimum.

    Ties between separate flats resolve to the extreme minimisers. The window
    ``[-T, T]`` starts at ``max(10, 1.5 margin / mark mean) / total intensity``
    and doubles until the
    interval sits strictly inside ``[-T/2, T/2]`` and the process at both
    ends of the window is at least :meth:`MarkedProcessSpec.safety_margin`
    above the minimum, so that the unseen continuation is unlikely to go lower.
    """
    right, left = _Side(spec, rng, 1.0), _Side(spec, rng, -1.0)
    margin = spec.safety_margin()
    lam = spec.total_intensity
    # start where the drift alone would clear the margin, to avoid most doublings
    T = max(10.0 / lam, 1.5 * margin / (spec.mark_moments()[0] * lam))
    for _ in range(MAX_DOUBLINGS + 1):
        right.extend(T)
        left.extend(T)
        r_first = float(right.times[0]) if right.times.size else T
        l_first = float(left.times[0]) if left.times.size else T
        rm, r_lo, r_hi = _side_minimum(right.times, right.marks, T)
        lm, l_lo, l_hi = _side_minimum(left.times, left.marks, T)
        best = min(0.0, rm, lm)
        lower, upper = None, None
        # the central flat (-l_first, r_first) has value 0
        if lm == best:
            lower = -l_hi
        elif best == 0.0:
            lower = -l_first
        if rm == best:
            upper = r_hi
        elif best == 0.0:
            upper = r_first
        if lower is None:
            lower = r_lo
        if upper is None:
            upper = -l_lo
        r_end = float(right.marks.sum())
        l_end = float(left.marks.sum())
        settled = min(r_end, l_end) - best >= margin
        if settled and -T / 2 < lower and upper < T / 2:
            return MinimizerInterval(lower, upper, 0.5 * (lower + upper), best, T)
        T *= 2.0
    raise WindowExplosion(f"minimum not contained after {MAX_DOUBLINGS} window doublings; "
                          "the marks may not have positive mean")


def midpoint_sample(spec: MarkedProcessSpec, repeats: int, seed: int,
                    stream: Sequence[int] = ()) -> np.ndarray:
    """Midpoints of ``repeats`` independent minimiser intervals.

    Repeat ``r`` uses ``make_rng(seed, *stream, r)``.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    return np.array([simulate_min_interval(spec, make_rng(seed, *stream, r)).midpoint
                     for r in range(repeats)])


def location_scale_limit_samples(ls_asym, repeats: int, seed: int):
    """Limit midpoints of ``n xi_hat`` and ``n (nu_hat - nu*)`` drawn independently.

    ``ls_asym`` is a :class:`~shiftmatch.theory.LocationScaleAsymptotics`.
    """
    def spec(rates):
        comps = tuple((r, j) for r, j in zip(rates, ls_asym.jumps) if r > 0)
        return MarkedProcessSpec(comps, ls_asym.noise, ls_asym.loss)

    xi = midpoint_sample(spec(ls_asym.xi_intensities), repeats, seed, (0,))
    nu = midpoint_sample(spec(ls_asym.nu_intensities), repeats, seed, (1,))
    return xi, nu
