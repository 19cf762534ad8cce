"""Templates: known functions ``f`` that are shifted against a signal.

A :class:`Template` carries, besides its values, the structural facts the
estimator and the theory need: its support, the location and size of its
jumps, the points where its derivative breaks, and a Lipschitz bound away
from the jumps. Values are càdlàg: at a jump the template takes its
right limit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import ConfigError, UnknownTemplate

LIPSCHITZ = "lipschitz"
PIECEWISE_LIPSCHITZ = "piecewise_lipschitz"
HOLDER = "holder"


@dataclass(frozen=True)
class Template:
    """A real template with declared structure.

    Parameters
    ----------
    func : callable
        Vectorised ``x -> f(x)``, already zero outside ``support`` for
        non-periodic templates.
    support : (float, float)
        Closed interval outside of which ``f`` vanishes. Periodic templates
        use ``(0, 1)``.
    smoothness : str
        ``'lipschitz'``, ``'piecewise_lipschitz'`` or ``'holder'``.
    discontinuities : tuple of (location, jump)
        ``jump = f(d+) - f(d-)``; declared, never detected.
    kinks : tuple of float
        Points where ``f'`` is discontinuous (quadrature split points).
    derivative : callable, optional
        Vectorised ``f'`` away from kinks and jumps.
    periodic : bool
        If True, arguments are reduced modulo 1 before evaluation.
    lipschitz_bound : float
        Bound on ``|f'|`` away from the jumps. Zero means piecewise constant.
    alpha : float
        Hölder exponent, only meaningful when ``smoothness == 'holder'``.
    """

    func: Callable
    support: Tuple[float, float]
    smoothness: str = LIPSCHITZ
    discontinuities: Tuple[Tuple[float, float], ...] = ()
    kinks: Tuple[float, ...] = ()
    derivative: Optional[Callable] = None
    periodic: bool = False
    lipschitz_bound: float = 0.0
    alpha: float = 1.0
    name: str = "custom"
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if self.periodic:
            x = np.mod(x, 1.0)
        out = np.asarray(self.func(x), dtype=float)
        return float(out) if out.ndim == 0 else out

    def shift_eval(self, x, theta):
        """Value of ``f(x - theta)``."""
        return self.eval(np.asarray(x, dtype=float) - theta)

    def deriv(self, x):
        """``f'(x)``, by central differences when no derivative is declared."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            x = np.mod(x, 1.0)
        if self.derivative is not None:
            out = np.asarray(self.derivative(x), dtype=float)
        else:
            h = 1e-6
            out = (np.asarray(self.func(x + h)) - np.asarray(self.func(x - h))) / (2 * h)
        return float(out) if out.ndim == 0 else out

    @property
    def jump_locations(self) -> np.ndarray:
        return np.array([d for d, _ in self.discontinuities], dtype=float)

    @property
    def jump_sizes(self) -> np.ndarray:
        return np.array([j for _, j in self.discontinuities], dtype=float)

    @property
    def is_smooth(self) -> bool:
        return self.smoothness == LIPSCHITZ and not self.discontinuities

    @property
    def piecewise_constant(self) -> bool:
        return self.lipschitz_bound == 0.0

    def split_points(self) -> np.ndarray:
        """Support ends, kinks and jumps, sorted and de-duplicated."""
        pts = [*self.support, *self.kinks, *self.jump_locations]
        pts = [p for p in pts if np.isfinite(p)]
        return np.unique(np.asarray(pts, dtype=float))

    def as_periodic(self) -> "Template":
        """The same shape wrapped onto the unit circle."""
        a, b = self.support
        if a < 0 or b > 1:
            raise ValueError("only templates supported in [0, 1] can be made periodic")
        return replace(self, periodic=True, support=(0.0, 1.0),
                       name=f"{self.name}:periodic")


def template_eval(template: Template, x):
    return template.eval(x)


def template_shift_eval(template: Template, x, theta):
    return template.shift_eval(x, theta)


# ----------------------------------------------------------------- built-ins

def _tpl_a(x):
    return np.where((x >= 0.25) & (x < 0.5), 4 * x - 1,
                    np.where((x >= 0.5) & (x < 0.75), 3 - 4 * x, 0.0))


def _tpl_a_deriv(x):
    return np.where((x >= 0.25) & (x < 0.5), 4.0,
                    np.where((x >= 0.5) & (x < 0.75), -4.0, 0.0))


def _tpl_b(x):
    u = 4 * x - 2
    w = np.maximum(1 - u * u, 0.0)
    return w * w * w


def _tpl_b_deriv(x):
    u = 4 * x - 2
    w = np.maximum(1 - u * u, 0.0)
    return -24 * u * w * w


def _tpl_c(x):
    return np.where((x >= 0.25) & (x < 0.75), 1.0, 0.0)


def _tpl_d(x):
    return np.where(((x >= 0.2) & (x < 0.4)) | ((x >= 0.6) & (x < 0.8)), 1.0, 0.0)


def _tpl_e(x):
    return np.where((x >= 0.25) & (x < 0.5), 4 * x - 1, 0.0)


def _tpl_e_deriv(x):
    return np.where((x >= 0.25) & (x < 0.5), 4.0, 0.0)


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


# max |f'| for template B, attained at (4x-2)^2 = 1/5
_B_LIP = 24 * np.sqrt(0.2) * 0.8 ** 2


def _stump(a: float) -> Template:
    if a == 0 or not np.isfinite(a):
        raise UnknownTemplate("stump amplitude must be a non-zero finite number")

    def func(x, a=a):
        return np.where(x >= 0, a, 0.0)

    return Template(func, (0.0, np.inf), PIECEWISE_LIPSCHITZ, ((0.0, a),), (),
                    _zero, False, 0.0, name=f"stump:{a:g}")


_BUILTINS = {
    "A": lambda: Template(_tpl_a, (0.25, 0.75), LIPSCHITZ, (), (0.25, 0.5, 0.75),
                          _tpl_a_deriv, False, 4.0, name="A"),
    "B": lambda: Template(_tpl_b, (0.25, 0.75), LIPSCHITZ, (), (0.25, 0.75),
                          _tpl_b_deriv, False, _B_LIP, name="B"),
    "C": lambda: Template(_tpl_c, (0.25, 0.75), PIECEWISE_LIPSCHITZ,
                          ((0.25, 1.0), (0.75, -1.0)), (), _zero, False, 0.0, name="C"),
    "D": lambda: Template(_tpl_d, (0.2, 0.8), PIECEWISE_LIPSCHITZ,
                          ((0.2, 1.0), (0.4, -1.0), (0.6, 1.0), (0.8, -1.0)), (),
                          _zero, False, 0.0, name="D"),
    "E": lambda: Template(_tpl_e, (0.25, 0.5), PIECEWISE_LIPSCHITZ, ((0.5, -1.0),),
                          (0.25,), _tpl_e_deriv, False, 4.0, name="E"),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_template(name: str) -> Template:
    """Return a built-in template.

    ``name`` is one of ``"A"``..``"E"`` or ``"stump:<a>"``; a
    ``":periodic"`` suffix wraps the template onto the unit circle.
    """
    text = name.strip()
    periodic = False
    if text.lower().endswith(":periodic"):
        periodic = True
        text = text[: -len(":periodic")]
    if text.lower().startswith("stump"):
        _, _, arg = text.partition(":")
        try:
            tpl = _stump(float(arg) if arg else 1.0)
        except ValueError:
            raise UnknownTemplate(f"bad stump amplitude in {name!r}") from None
    else:
        try:
            tpl = _BUILTINS[text.upper()]()
        except KeyError:
            raise UnknownTemplate(f"unknown template {name!r}") from None
    return tpl.as_periodic() if periodic else tpl


# ------------------------------------------------------- piecewise polynomial

def piecewise_polynomial(pieces: Sequence, discontinuities: Sequence = (),
                         periodic: bool = False, name: str = "custom") -> Template:
    """Build a template from polynomial pieces.

    Parameters
    ----------
    pieces : sequence of ((a, b), coeffs)
        ``f(x) = sum(coeffs[k] * x**k)`` on ``[a, b)``; zero off all pieces.
        Pieces must not overlap.
    discontinuities : sequence of (d, jump)
        Declared jump locations and sizes ``f(d+) - f(d-)``.
    """
    parsed = []
    for interval, coeffs in pieces:
        a, b = map(float, interval)
        if not a < b:
            raise ConfigError(f"empty piece interval [{a}, {b})")
        parsed.append((a, b, Polynomial(np.asarray(coeffs, dtype=float))))
    if not parsed:
        raise ConfigError("a piecewise template needs at least one piece")
    parsed.sort(key=lambda p: p[0])
    for (a0, b0, _), (a1, _, _) in zip(parsed, parsed[1:]):
        if a1 < b0:
            raise ConfigError("template pieces overlap")

    def func(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, p in parsed:
            m = (x >= a) & (x < b)
            out = np.where(m, p(x), out)
        return out

    derivs = [(a, b, p.deriv()) for a, b, p in parsed]

    def deriv(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, dp in derivs:
            out = np.where((x >= a) & (x < b), dp(x), out)
        return out

    lip = 0.0
    for a, b, dp in derivs:
        cands = [a, b]
        d2 = dp.deriv()
        if d2.degree() >= 1 or np.any(d2.coef):
            cands += [r.real for r in np.atleast_1d(d2.roots())
                      if abs(r.imag) < 1e-12 and a < r.real < b]
        lip = max(lip, float(np.max(np.abs(dp(np.asarray(cands))))))

    disc = tuple((float(d), float(j)) for d, j in discontinuities)
    ends = sorted({p[0] for p in parsed} | {p[1] for p in parsed})
    jump_pts = {d for d, _ in disc}
    kinks = tuple(e for e in ends if e not in jump_pts)
    support = (parsed[0][0], parsed[-1][1])
    smooth = PIECEWISE_LIPSCHITZ if disc else LIPSCHITZ
    tpl = Template(func, support, smooth, disc, kinks, deriv, False, lip, name=name)
    return tpl.as_periodic() if periodic else tpl


def template_from_json(source) -> Template:
    """Load a piecewise-polynomial template from a JSON file or dict.

    Expected keys: ``pieces`` (list of ``{"interval": [a, b],
    "coeffs": [c0, c1, ...]}``), optional ``discontinuities`` (list of
    ``[d, jump]``), ``periodic`` and ``name``.
    """
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text())
    else:
        data = dict(source)
    try:
        pieces = [(p["interval"], p["coeffs"]) for p in data["pieces"]]
    except (KeyError, TypeError):
        raise ConfigError("template JSON needs 'pieces' with 'interval' and 'coeffs'") from None
    return piecewise_polynomial(pieces, data.get("discontinuities", ()),
                                bool(data.get("periodic", False)),
                                data.get("name", "custom"))


def resolve_template(spec) -> Template:
    """Template from an object, a built-in name, or a JSON path."""
    if isinstance(spec, Template):
        return spec
    text = str(spec)
    if text.lower().endswith(".json"):
        return template_from_json(text)
    return builtin_template(text)
