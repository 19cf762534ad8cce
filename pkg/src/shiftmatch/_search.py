"""Search primitives shared by the estimators.

Only the shift objective gets special treatment here: evaluation restricted
to the design points that can overlap the template, an exact sweep for
piecewise-constant templates, and breakpoint enumeration.
"""
from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# elements per vectorised block (thetas x active points)
_BLOCK = 1 << 17


def golden_section(func, lo, hi, tol, f_lo=None, f_hi=None, max_iter=200):
    """Minimise a scalar function on ``[lo, hi]`` by golden-section search.

    The end points take part in the comparison, so a monotone function
    returns its better end point. Returns ``(x, fx, trace)`` where ``trace``
    lists every ``(x, f(x))`` evaluated (end points included).
    """
    trace = []

    def f(x):
        v = func(x)
        trace.append((x, v))
        return v

    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    best = min([(lo, f_lo), (hi, f_hi)] + trace, key=lambda t: (t[1], t[0]))
    return best[0], best[1], trace


def local_minima(values: np.ndarray) -> np.ndarray:
    """Indices ``i`` with ``v[i] <= v[i-1]`` and ``v[i] <= v[i+1]`` (ends one-sided)."""
    v = np.asarray(values)
    if v.size == 1:
        return np.array([0])
    left = np.r_[True, v[1:] <= v[:-1]]
    right = np.r_[v[:-1] <= v[1:], True]
    return np.flatnonzero(left & right)


class ShiftObjective:
    """Vectorised evaluation of ``(1/n) sum L(y_i - f(x_i - theta))``."""

    def __init__(self, xs, ys, template, loss):
        order = np.argsort(xs, kind="stable")
        self.xs = np.asarray(xs, dtype=float)[order]
        self.ys = np.asarray(ys, dtype=float)[order]
        self.n = len(self.xs)
        self.template = template
        self.loss = loss
        self.base = loss.value(self.ys)
        self.base_total = float(np.sum(self.base))
        self.evaluations = 0
        a, b = template.support
        self._windowed = not template.periodic
        self._a, self._b = a, b

    @property
    def scale(self) -> float:
        """Objective value when the template overlaps no design point."""
        return self.base_total / self.n

    def active_fraction(self) -> float:
        if not self._windowed:
            return 1.0
        width = self._b - self._a
        span = self.xs[-1] - self.xs[0] if self.n > 1 else 1.0
        return float(min(1.0, width / span)) if np.isfinite(width) and span > 0 else 1.0

    def _block(self, thetas):
        if self._windowed:
            i0 = np.searchsorted(self.xs, self._a + thetas[0], side="left")
            i1 = np.searchsorted(self.xs, self._b + thetas[-1], side="right")
        else:
            i0, i1 = 0, self.n
        if i1 <= i0:
            return np.full(len(thetas), self.base_total)
        xs = self.xs[i0:i1]
        ys = self.ys[i0:i1]
        fv = self.template.eval(xs[None, :] - thetas[:, None])
        diff = self.loss.value(ys[None, :] - fv) - self.base[None, i0:i1]
        return self.base_total + diff.sum(axis=1)

    def values(self, thetas) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        if thetas.size == 0:
            return np.empty(0)
        order = np.argsort(thetas, kind="stable")
        st = thetas[order]
        out = np.empty_like(st)
        per = max(1, int(self.n * self.active_fraction()))
        step = max(1, _BLOCK // per)
        for s in range(0, st.size, step):
            out[s:s + step] = self._block(st[s:s + step])
        self.evaluations += thetas.size
        res = np.empty_like(out)
        res[order] = out / self.n
        return res

    def __call__(self, theta: float) -> float:
        return float(self.values([theta])[0])

    def exact(self, theta: float) -> float:
        r = self.ys - self.template.shift_eval(self.xs, theta)
        return float(np.mean(self.loss.value(r)))

    # -- breakpoints --------------------------------------------------------

    def breakpoints(self, lo: float, hi: float):
        """Sorted breakpoints ``x_i - d`` inside ``(lo, hi)`` with their origin.

        Returns ``(theta, point_index, jump_index)``.
        """
        locs = self.template.jump_locations
        if locs.size == 0:
            return np.empty(0), np.empty(0, int), np.empty(0, int)
        raw = self.xs[:, None] - locs[None, :]
        idx = np.broadcast_to(np.arange(self.n)[:, None], raw.shape)
        jdx = np.broadcast_to(np.arange(locs.size)[None, :], raw.shape)
        if self.template.periodic:
            ks = np.arange(math.floor(lo - 2.0), math.ceil(hi + 2.0) + 1)
            raw = raw[..., None] + ks
            idx = np.broadcast_to(idx[..., None], raw.shape)
            jdx = np.broadcast_to(jdx[..., None], raw.shape)
        raw, idx, jdx = raw.ravel(), idx.ravel(), jdx.ravel()
        keep = (raw > lo) & (raw < hi)
        raw, idx, jdx = raw[keep], idx[keep], jdx[keep]
        order = np.argsort(raw, kind="stable")
        return raw[order], idx[order], jdx[order]

    def sweep_piecewise_constant(self, lo, hi, bps, idx, jdx):
        """Objective on every breakpoint piece of a piecewise-constant template.

        Piece ``k`` is ``[edges[k], edges[k+1])`` with ``edges = [lo, *bps, hi]``;
        only one term of the sum changes when a breakpoint is crossed, so all
        piece values follow from a cumulative sum.
        """
        edges = np.concatenate(([lo], bps, [hi]))
        first_mid = 0.5 * (edges[0] + edges[1])
        v0 = self.exact(first_mid) * self.n
        tpl = self.template
        d = tpl.jump_locations[jdx]
        f_right = tpl.eval(d)
        f_left = f_right - tpl.jump_sizes[jdx]
        y = self.ys[idx]
        delta = self.loss.value(y - f_left) - self.loss.value(y - f_right)
        vals = np.concatenate(([v0], v0 + np.cumsum(delta))) / self.n
        self.evaluations += vals.size
        return edges, vals
