"""Deterministic asymptotic constants.

Every expectation is a quadrature (``scipy.integrate.quad``) split at the
known kinks and jumps of the integrand. Integrals over the whole real line
use ``z = s tan(u)`` so heavy-tailed noise needs no truncation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from .distributions import CAUCHY, DEGENERATE, GAUSSIAN, DesignModel, NoiseModel
from .exceptions import (InadmissiblePair, InfiniteMoment, NoDiscontinuity,
                         NonSmoothTemplate, QuadratureError, ZeroCurvature)
from .losses import ABSOLUTE, HUBER, SQUARED, TUKEY, Loss, scalar_loss
from .templates import Template

EPSREL = 1e-10
CURVATURE_FLOOR = 1e-12


def _quad(g, a, b):
    val, err = integrate.quad(g, a, b, epsabs=1e-14, epsrel=EPSREL, limit=500)
    if not np.isfinite(val):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    return val


def _panels(g, pts):
    """Sum of integrals of ``g`` over consecutive panels of sorted ``pts``."""
    pts = np.unique(np.asarray(pts, dtype=float))
    return math.fsum(_quad(g, a, b) for a, b in zip(pts[:-1], pts[1:]) if b > a)


def noise_expectation(g, noise: NoiseModel, kinks: Sequence[float] = ()) -> float:
    """``E[g(Z)]`` for a scalar function ``g``, split at ``kinks``."""
    if noise.kind == DEGENERATE:
        return float(g(0.0))
    s = noise.scale
    pdf = noise.scalar_pdf()

    def h(u):
        z = s * math.tan(u)
        w = pdf(z)
        return g(z) * w * s / math.cos(u) ** 2 if w > 0 else 0.0

    half = math.pi / 2
    pts = [-half, half, 0.0] + [math.atan(k / s) for k in kinks]
    return _panels(h, pts)


def _finite_mean(loss: Loss, noise: NoiseModel) -> bool:
    """Whether ``E[L(Z)]`` is finite."""
    if loss.kind == TUKEY:
        return True
    if loss.kind == SQUARED:
        return np.isfinite(noise.variance)
    return noise.kind != CAUCHY and not (noise.kind == "t" and noise.param <= 1)


def loss_moments(loss: Loss, noise: NoiseModel) -> Tuple[float, float]:
    """``(C0, C1) = (E[L''(Z)] / 2, E[L'(Z)^2])``.

    For the absolute loss ``C0`` is ``phi(0)``, the limit of the smoothed
    curvature.
    """
    if noise.kind == DEGENERATE:
        raise InadmissiblePair("degenerate noise has no density")
    if loss.kind == SQUARED:
        var = noise.variance
        if not np.isfinite(var):
            raise InfiniteMoment(f"squared loss needs finite variance; {noise} has none")
        return 1.0, 4.0 * var
    if loss.kind == ABSOLUTE:
        p0 = float(noise.pdf(0.0))
        if not p0 > 0:
            raise InadmissiblePair("absolute loss needs phi(0) > 0")
        return p0, 1.0
    c = loss.c
    if loss.kind == HUBER:
        inside = float(noise.cdf(c) - noise.cdf(-c))
        tail = 2.0 * float(noise.cdf(-c)) * c * c
        pdf = noise.scalar_pdf()
        second = _panels(lambda z: z * z * pdf(z), [-c, 0.0, c]) + tail
        return 0.5 * inside, second
    # Tukey: both integrands vanish outside [-c, c]
    pdf = noise.scalar_pdf()
    c2 = c * c

    def curv_g(z):
        s_ = z * z / c2
        return 6.0 * (1.0 - s_) * (1.0 - 5.0 * s_) / c2 * pdf(z)

    def score_g(z):
        u = 1.0 - z * z / c2
        return (6.0 * z * u * u / c2) ** 2 * pdf(z)

    curv = _panels(curv_g, [-c, 0.0, c])
    second = _panels(score_g, [-c, 0.0, c])
    return 0.5 * curv, second


def c_phi_loss(loss: Loss, noise: NoiseModel) -> float:
    """``E[L'(Z)^2] / E[L''(Z)]^2``; ``1 / (4 phi(0)^2)`` for the absolute loss."""
    c0, c1 = loss_moments(loss, noise)
    if 2.0 * c0 < CURVATURE_FLOOR:
        raise ZeroCurvature(f"E[L''(Z)] = {2 * c0:.3g} for {loss} under {noise}")
    return c1 / (2.0 * c0) ** 2


def fisher_information_location(noise: NoiseModel) -> float:
    """``int phi'^2 / phi`` by quadrature (cross-check of the closed forms)."""
    return noise_expectation(lambda z: noise.score(z) ** 2, noise, (0.0,))


# ------------------------------------------------------------- design side

def _design_expectation(g, design: DesignModel, pts) -> float:
    """``int g(x) lambda(x) dx`` over the design support."""
    a, b = design.support
    inner = [p for p in pts if a < p < b]
    dens = 1.0 / (b - a)
    return dens * _panels(g, [a, b, *inner])


def _shifted_splits(template: Template, *shifts: float) -> list:
    base = template.split_points()
    if template.periodic:
        base = np.concatenate([base + k for k in range(-3, 4)])
    return [float(p + s) for s in shifts for p in base]


@dataclass(frozen=True)
class AsymptoticReport:
    """Constants of the normal limit for a smooth template."""

    c_phi_loss: float
    denom: float
    tau2: float
    c0: float
    c1: float
    info: float

    def to_dict(self) -> dict:
        return asdict(self)


def asymptotic_variance_shift(template: Template, design: DesignModel, loss: Loss,
                              noise: NoiseModel, theta_star: float = 0.0) -> AsymptoticReport:
    """``tau^2 = C_{phi,L} / E[f'(X - theta*)^2]`` plus related constants.

    ``info`` is the Fisher information ``E[f'(X - theta*)^2] int phi'^2/phi``.
    """
    if not template.is_smooth:
        raise NonSmoothTemplate(f"template {template.name} is not Lipschitz")
    c0, c1 = loss_moments(loss, noise)
    if 2.0 * c0 < CURVATURE_FLOOR:
        raise ZeroCurvature(f"E[L''(Z)] = {2 * c0:.3g} for {loss} under {noise}")
    cpl = c1 / (2.0 * c0) ** 2
    denom = _design_expectation(lambda x: float(template.deriv(x - theta_star)) ** 2,
                                design, _shifted_splits(template, theta_star))
    if not denom > 0:
        raise NonSmoothTemplate("E[f'(X - theta*)^2] vanishes on the design support")
    return AsymptoticReport(cpl, denom, cpl / denom, c0, c1, denom * noise.fisher_location)


def delta(template: Template, design: DesignModel, theta1: float, theta2: float) -> float:
    """``int (f(x - theta1) - f(x - theta2))^2 lambda(x) dx``."""
    if theta1 == theta2:
        return 0.0

    def g(x):
        d = float(template.eval(x - theta1)) - float(template.eval(x - theta2))
        return d * d

    return _design_expectation(g, design, _shifted_splits(template, theta1, theta2))


def jump_constant(template: Template, design: DesignModel, theta_star: float = 0.0) -> float:
    """``D = sum_d jump_d^2 lambda(d + theta*)``."""
    locs, sizes = template.jump_locations, template.jump_sizes
    if locs.size == 0:
        raise NoDiscontinuity(f"template {template.name} has no jumps")
    lam = np.atleast_1d(design.pdf(locs + theta_star))
    if not np.any(lam > 0):
        raise NoDiscontinuity("no jump falls inside the design support")
    return float(np.sum(sizes ** 2 * lam))


def _risk_kinks(loss: Loss, a: float) -> list:
    return [k for base in loss.kinks for k in (base, base - a)] + [0.0, -a]


def shifted_loss_mean(loss: Loss, noise: NoiseModel, a: float) -> float:
    """``E[L(Z + a)]``."""
    if not _finite_mean(loss, noise):
        raise InadmissiblePair(f"E[L(Z)] is infinite for {loss} under {noise}")
    if loss.kind == SQUARED:
        return noise.variance + a * a
    L = scalar_loss(loss)
    return noise_expectation(lambda z: L(z + a), noise, _risk_kinks(loss, a))


def shifted_loss_increment(loss: Loss, noise: NoiseModel, a: float) -> float:
    """``E[L(Z + a) - L(Z)]``, finite even when ``E[L(Z)]`` is not."""
    if a == 0:
        return 0.0
    if loss.kind == SQUARED:
        if not np.isfinite(noise.variance):
            raise InfiniteMoment(f"squared loss needs finite variance; {noise} has none")
        return a * a
    if noise.kind == DEGENERATE:
        return float(loss.value(a))
    L = scalar_loss(loss)
    return noise_expectation(lambda z: L(z + a) - L(z), noise, _risk_kinks(loss, a))


def population_risk(template: Template, design: DesignModel, loss: Loss, noise: NoiseModel,
                    theta: float, theta_star: float = 0.0) -> float:
    """``M(theta) = E[L(Z + f(X - theta*) - f(X - theta))]``."""
    if not _finite_mean(loss, noise):
        raise InadmissiblePair(f"E[L(Z)] is infinite for {loss} under {noise}")
    base = shifted_loss_mean(loss, noise, 0.0)
    if theta == theta_star:
        return base
    return base + excess_risk(template, design, loss, noise, theta, theta_star)


def excess_risk(template: Template, design: DesignModel, loss: Loss, noise: NoiseModel,
                theta: float, theta_star: float = 0.0) -> float:
    """``M(theta) - M(theta*)`` integrated directly (no cancellation)."""
    if theta == theta_star:
        return 0.0

    def g(x):
        a = float(template.eval(x - theta_star)) - float(template.eval(x - theta))
        return shifted_loss_increment(loss, noise, a)

    return _design_expectation(g, design, _shifted_splits(template, theta, theta_star))


def relative_efficiency(loss: Loss, noise: NoiseModel) -> float:
    """Asymptotic variance ratio of ``loss`` against least squares."""
    if noise.kind != GAUSSIAN:
        raise InadmissiblePair("relative efficiency is defined for Gaussian noise")
    return c_phi_loss(loss, noise) / noise.variance


@dataclass(frozen=True)
class LocationScaleAsymptotics:
    """Limit ingredients of the amplitude-location-scale fit.

    ``beta_var`` is the variance of the normal limit of
    ``sqrt(n)(beta_hat - beta*)``. ``xi_intensities`` and ``nu_intensities``
    are the per-jump event rates of the two marked Poisson processes; the
    mark of jump ``k`` is distributed as ``L(Z + jumps[k]) - L(Z)``.
    """

    beta_var: float
    xi_intensities: Tuple[float, ...]
    nu_intensities: Tuple[float, ...]
    jumps: Tuple[float, ...]
    locations: Tuple[float, ...]
    loss: Loss
    noise: NoiseModel

    def to_dict(self) -> dict:
        return {"beta_var": self.beta_var, "xi_intensities": list(self.xi_intensities),
                "nu_intensities": list(self.nu_intensities), "jumps": list(self.jumps),
                "locations": list(self.locations), "loss": str(self.loss),
                "noise": str(self.noise)}


def location_scale_asymptotics(template: Template, design: DesignModel, loss: Loss,
                               noise: NoiseModel, theta_star=(1.0, 0.0, 1.0)
                               ) -> LocationScaleAsymptotics:
    beta, xi, nu = map(float, theta_star)
    cpl = c_phi_loss(loss, noise)
    scaled = [xi + nu * float(p) for p in template.split_points()]
    fsq = _design_expectation(lambda x: float(template.eval((x - xi) / nu)) ** 2, design, scaled)
    if not fsq > 0:
        raise InadmissiblePair("template vanishes on the design support")
    locs, sizes = template.jump_locations, template.jump_sizes
    edges = xi + nu * locs
    lam = np.atleast_1d(design.pdf(edges)) if locs.size else np.empty(0)
    keep = lam > 0
    return LocationScaleAsymptotics(
        beta_var=cpl / fsq,
        xi_intensities=tuple(float(v) for v in lam[keep]),
        nu_intensities=tuple(float(v) for v in (lam * np.abs(locs))[keep]),
        jumps=tuple(float(v) for v in (beta * sizes)[keep]),
        locations=tuple(float(v) for v in edges[keep]),
        loss=loss,
        noise=noise,
    )
