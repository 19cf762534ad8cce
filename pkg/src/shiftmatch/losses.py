"""Residual losses: squared error, absolute value, Huber and Tukey biweight.

All evaluation functions are vectorised over ``r`` and return ``float`` for
scalar input.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import UnsupportedLoss

SQUARED = "squared"
ABSOLUTE = "absolute"
HUBER = "huber"
TUKEY = "tukey"

KINDS = (SQUARED, ABSOLUTE, HUBER, TUKEY)

# classical 95%-Gaussian-efficiency thresholds
DEFAULT_HUBER_C = 1.345
DEFAULT_TUKEY_C = 4.685


def _out(values, r):
    return float(values) if np.ndim(r) == 0 else values


@dataclass(frozen=True)
class Loss:
    """A loss family with its threshold.

    Parameters
    ----------
    kind : {'squared', 'absolute', 'huber', 'tukey'}
    c : float, optional
        Threshold for Huber and Tukey. Defaults to 1.345 (Huber) and
        4.685 (Tukey). Ignored, and stored as None, for the other two.
    """

    kind: str
    c: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedLoss(f"unknown loss kind {self.kind!r}")
        if self.kind in (HUBER, TUKEY):
            c = self.c
            if c is None:
                c = DEFAULT_HUBER_C if self.kind == HUBER else DEFAULT_TUKEY_C
            c = float(c)
            if not np.isfinite(c) or c <= 0:
                raise UnsupportedLoss(f"{self.kind} threshold must be > 0, got {c}")
            object.__setattr__(self, "c", c)
        else:
            object.__setattr__(self, "c", None)

    @classmethod
    def from_string(cls, text: str) -> "Loss":
        """Parse ``"squared" | "absolute" | "huber[:c]" | "tukey[:c]"``."""
        kind, _, arg = text.strip().lower().partition(":")
        if kind not in KINDS:
            raise UnsupportedLoss(f"unknown loss {text!r}")
        if arg and kind not in (HUBER, TUKEY):
            raise UnsupportedLoss(f"loss {kind!r} takes no parameter")
        try:
            c = float(arg) if arg else None
        except ValueError:
            raise UnsupportedLoss(f"bad loss threshold in {text!r}") from None
        return cls(kind, c)

    def __str__(self) -> str:
        return self.kind if self.c is None else f"{self.kind}:{self.c:g}"

    @property
    def is_lipschitz(self) -> bool:
        return self.kind != SQUARED

    @property
    def kinks(self) -> tuple:
        """Points where the second derivative is discontinuous."""
        if self.kind == ABSOLUTE:
            return (0.0,)
        if self.kind in (HUBER, TUKEY):
            return (-self.c, self.c)
        return ()

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == SQUARED:
            out = r * r
        elif self.kind == ABSOLUTE:
            out = np.abs(r)
        elif self.kind == HUBER:
            a = np.abs(r)
            c = self.c
            out = np.where(a <= c, 0.5 * r * r, c * a - 0.5 * c * c)
        else:
            q = r / self.c
            w = np.maximum(1.0 - q * q, 0.0)
            out = 1.0 - w * w * w
        return _out(out, r)

    __call__ = value

    def d1(self, r):
        """First derivative; the absolute loss uses 0 at the origin."""
        r = np.asarray(r, dtype=float)
        if self.kind == SQUARED:
            out = 2.0 * r
        elif self.kind == ABSOLUTE:
            out = np.sign(r)
        elif self.kind == HUBER:
            out = np.clip(r, -self.c, self.c)
        else:
            c2 = self.c * self.c
            u = 1.0 - r * r / c2
            out = np.where(np.abs(r) <= self.c, 6.0 * r * u * u / c2, 0.0)
        return _out(out, r)

    def d2(self, r):
        """Second derivative (a.e.); left-limit value at the Huber kinks."""
        r = np.asarray(r, dtype=float)
        if self.kind == ABSOLUTE:
            raise UnsupportedLoss("absolute loss has no second derivative; "
                                  "use the phi(0) formulas instead")
        if self.kind == SQUARED:
            out = np.full_like(r, 2.0)
        elif self.kind == HUBER:
            out = (np.abs(r) <= self.c).astype(float)
        else:
            c2 = self.c * self.c
            s = r * r / c2
            u = 1.0 - s
            out = np.where(np.abs(r) <= self.c, 6.0 * u * (u - 4.0 * s) / c2, 0.0)
        return _out(out, r)


def scalar_loss(loss: Loss):
    """``L`` as a plain-float function, for scalar quadrature loops."""
    c = loss.c
    if loss.kind == SQUARED:
        return lambda r: r * r
    if loss.kind == ABSOLUTE:
        return abs
    if loss.kind == HUBER:
        return lambda r: 0.5 * r * r if abs(r) <= c else c * abs(r) - 0.5 * c * c

    def tukey(r):
        if abs(r) >= c:
            return 1.0
        w = 1.0 - (r / c) ** 2
        return 1.0 - w * w * w

    return tukey


def loss_value(loss: Loss, r):
    return loss.value(r)


def loss_d1(loss: Loss, r):
    return loss.d1(r)


def loss_d2(loss: Loss, r):
    return loss.d2(r)


def parse_loss(text) -> Loss:
    if isinstance(text, Loss):
        return text
    return Loss.from_string(text)
