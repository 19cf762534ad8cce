"""Empirical risk minimisation for template matching.

Three estimators are provided:

* :func:`fit_shift` -- the shift M-estimator ``argmin_t (1/n) sum L(y_i - f(x_i - t))``;
* :func:`fit_location_scale` -- amplitude, location and scale
  ``(beta, xi, nu)`` in ``y = beta f((x - xi) / nu) + z``;
* :func:`fit_periodic_correlation` -- the grid correlation (matched filter)
  estimator on a regular design with a 1-periodic template.

:class:`ShiftMEstimator` and :class:`LocationScaleMEstimator` wrap the first
two behind the scikit-learn estimator API.

The empirical objective of a discontinuous template is piecewise smooth in
the parameter, with breakpoints where some ``x_i - t`` crosses a jump of
``f``. The searches below look at those breakpoints explicitly; a plain grid
cannot resolve structure on the ``1/n`` scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._search import ShiftObjective, golden_section, local_minima
from .datagen import Dataset
from .exceptions import DegenerateBounds, EmptyDataset, InvalidBounds, NotRegularGrid
from .losses import SQUARED, TUKEY, Loss, parse_loss
from .templates import Template, resolve_template

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the global searches.

    Parameters
    ----------
    param_bounds : (lo, hi) or ((b_lo, b_hi), (xi_lo, xi_hi), (nu_lo, nu_hi)), optional
        Search interval for the shift, or box for the location-scale fit.
        Derived from the data and template support when None.
    coarse_grid_size : int
        Points of the uniform grid overlaid on the shift interval. The grid is
        densified automatically for small samples (see ``grid_budget``).
    refine_tol : float
        Absolute tolerance of the golden-section refinement.
    use_breakpoints : bool
        Evaluate the objective between the breakpoints ``x_i - d``.
    n_starts : int
        Number of local minima that get refined.
    grid_budget : int
        Template evaluations allowed for the coarse grid.
    breakpoint_budget : int
        Above this many template evaluations, breakpoints are only examined
        in windows around the best coarse-grid minima.
    window_steps : int
        Half-width of those windows, in coarse grid steps.
    ls_grid_size : int
        Points per axis of the (xi, nu) grid in the location-scale fit.
    """

    param_bounds: Optional[tuple] = None
    coarse_grid_size: int = 256
    refine_tol: float = 1e-7
    use_breakpoints: bool = True
    n_starts: int = 5
    grid_budget: int = 1_000_000
    breakpoint_budget: int = 4_000_000
    window_steps: int = 3
    ls_grid_size: int = 21

    def __post_init__(self):
        if self.coarse_grid_size < 8:
            raise ValueError("coarse_grid_size must be >= 8")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be > 0")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.ls_grid_size < 2:
            raise ValueError("ls_grid_size must be >= 2")


@dataclass
class EstimationResult:
    """Outcome of a fit.

    ``theta`` is a float for the shift fits and a ``(beta, xi, nu)`` tuple
    for the location-scale fit. ``minimizer_interval_hint`` is the closed
    interval on which the empirical objective is flat at its minimum, when
    there is one.
    """

    theta: object
    objective_at_min: float
    evaluations: int
    minimizer_interval_hint: Optional[Tuple[float, float]] = None
    extra: dict = field(default_factory=dict)

    @property
    def midpoint(self) -> float:
        """Centre of the flat minimum when present, else the estimate."""
        if self.minimizer_interval_hint is not None:
            lo, hi = self.minimizer_interval_hint
            return 0.5 * (lo + hi)
        return self.theta

    def to_dict(self) -> dict:
        theta = self.theta
        if isinstance(theta, tuple):
            theta = dict(zip(("beta", "xi", "nu"), map(float, theta)))
        else:
            theta = float(theta)
        hint = self.minimizer_interval_hint
        return {
            "theta": theta,
            "objective_at_min": float(self.objective_at_min),
            "evaluations": int(self.evaluations),
            "minimizer_interval_hint": None if hint is None else [float(hint[0]), float(hint[1])],
            **({"extra": self.extra} if self.extra else {}),
        }


def objective(dataset: Dataset, template: Template, loss: Loss, theta: float) -> float:
    """``(1/n) sum L(y_i - f(x_i - theta))``."""
    if dataset.n == 0:
        raise EmptyDataset("objective of an empty dataset")
    r = dataset.ys - template.shift_eval(dataset.xs, theta)
    return float(np.mean(loss.value(r)))


def default_shift_bounds(dataset: Dataset, template: Template) -> Tuple[float, float]:
    """``[-2A, 2A]`` with ``[-A, A]`` covering the template and the design."""
    if template.periodic:
        return (-0.5, 0.5)
    ends = [abs(v) for v in template.support if np.isfinite(v)]
    ends.append(float(np.max(np.abs(dataset.xs))))
    A = max(ends)
    return (-2 * A, 2 * A)


def _check_interval(bounds, allow_point=False):
    lo, hi = map(float, bounds)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise DegenerateBounds(f"bounds must be finite, got {bounds}")
    if hi < lo or (hi == lo and not allow_point):
        raise DegenerateBounds(f"empty search interval [{lo}, {hi}]")
    return lo, hi


# ------------------------------------------------------------------- shift

def fit_shift(dataset: Dataset, template: Template, loss: Loss,
              cfg: Optional[SearchConfig] = None) -> EstimationResult:
    """Global minimiser of the shift objective over an interval.

    The search evaluates a uniform grid plus every breakpoint piece of the
    objective (midpoints and the breakpoints themselves), refines the best
    ``n_starts`` local minima by golden-section search, and returns the best
    point seen. When the minimum is attained on a flat stretch, the smallest
    minimising point is returned and the stretch is reported as
    ``minimizer_interval_hint``.
    """
    if dataset.n == 0:
        raise EmptyDataset("cannot fit an empty dataset")
    cfg = cfg or SearchConfig()
    lo, hi = _check_interval(cfg.param_bounds or default_shift_bounds(dataset, template))
    ev = ShiftObjective(dataset.xs, dataset.ys, template, loss)
    per_theta = max(1.0, ev.n * ev.active_fraction())
    G = int(max(cfg.coarse_grid_size, min(cfg.grid_budget // per_theta, 20001)))
    grid = np.linspace(lo, hi, G)

    bps = np.empty(0)
    if cfg.use_breakpoints and template.discontinuities:
        bps, idx, jdx = ev.breakpoints(lo, hi)
    edges = np.concatenate(([lo], bps, [hi]))

    ts, vs = [], []
    if bps.size and template.piecewise_constant:
        # exact sweep; grid points read off their piece
        edges, piece_vals = ev.sweep_piecewise_constant(lo, hi, bps, idx, jdx)
        ts += [0.5 * (edges[:-1] + edges[1:]), grid]
        vs += [piece_vals, piece_vals[_piece_index(edges, grid)]]
    else:
        grid_vals = ev.values(grid)
        ts.append(grid)
        vs.append(grid_vals)
        if bps.size:
            if bps.size * per_theta <= cfg.breakpoint_budget:
                sel = bps
                mids = 0.5 * (edges[:-1] + edges[1:])
            else:
                sel, mids = _windowed_breakpoints(grid, grid_vals, bps, cfg)
            cand = mids
            ts.append(cand)
            vs.append(ev.values(cand))

    t = np.concatenate(ts)
    v = np.concatenate(vs)
    order = np.argsort(t, kind="stable")
    t, v = t[order], v[order]

    refine = not (bps.size and template.piecewise_constant)
    if refine:
        mins = local_minima(v)
        mins = mins[np.argsort(v[mins], kind="stable")][: cfg.n_starts]
        extra_t, extra_v = [], []
        for i in mins:
            a, b = max(i - 1, 0), min(i + 1, len(t) - 1)
            if a == b:
                continue
            _, _, trace = golden_section(ev, t[a], t[b], cfg.refine_tol, v[a], v[b])
            extra_t += [p[0] for p in trace]
            extra_v += [p[1] for p in trace]
        if extra_t:
            t = np.concatenate((t, extra_t))
            v = np.concatenate((v, extra_v))

    best_val = float(np.min(v))
    # re-evaluate the contenders exactly before deciding ties
    near = np.flatnonzero(v <= best_val + 1e3 * _tie_tol(best_val, ev))
    if near.size > 2000:
        near = near[np.argsort(v[near], kind="stable")[:2000]]
    cand_t = t[near]
    exact = np.array([ev.exact(x) for x in cand_t])
    if refine and bps.size:
        # a piece's infimum may sit on its closed end, which only the breakpoint itself attains
        top = cand_t[np.argsort(exact, kind="stable")[: cfg.n_starts]]
        k = np.searchsorted(bps, top)
        ends = np.unique(np.concatenate((bps[np.clip(k - 1, 0, bps.size - 1)],
                                         bps[np.clip(k, 0, bps.size - 1)])))
        cand_t = np.concatenate((cand_t, ends))
        exact = np.concatenate((exact, [ev.exact(x) for x in ends]))
    best_val = float(np.min(exact))
    tol = _tie_tol(best_val, ev)
    tied = cand_t[exact <= best_val + tol]
    theta_hat = float(cand_t[np.argmin(exact)])

    hint = _flat_hint(ev, tied, edges if bps.size else None, best_val, tol, cfg.refine_tol)
    if hint is not None:
        theta_hat = float(np.min(tied))
    return EstimationResult(theta_hat, ev.exact(theta_hat), ev.evaluations, hint)


def _tie_tol(value, ev):
    """Relative tie tolerance, floored at rounding level of the data scale."""
    return max(TIE_RTOL * abs(value), 1e-15 * ev.scale, 1e-300)


def _piece_index(edges: np.ndarray, t) -> np.ndarray:
    """Piece holding ``t``; a breakpoint belongs to the piece on its left."""
    k = np.searchsorted(edges, t, side="left") - 1
    return np.clip(k, 0, len(edges) - 2)


def _windowed_breakpoints(grid, grid_vals, bps, cfg):
    mins = local_minima(grid_vals)
    mins = mins[np.argsort(grid_vals[mins], kind="stable")][: cfg.n_starts]
    w = cfg.window_steps
    windows = sorted((grid[max(j - w, 0)], grid[min(j + w, len(grid) - 1)]) for j in mins)
    merged = [list(windows[0])]
    for a, b in windows[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    sels, mids = [], []
    for a, b in merged:
        i0, i1 = np.searchsorted(bps, a, "left"), np.searchsorted(bps, b, "right")
        # include one breakpoint beyond each end so boundary pieces are complete
        s = bps[max(i0 - 1, 0): min(i1 + 1, len(bps))]
        e = np.concatenate(([a], s, [b])) if s.size == 0 else s
        sels.append(s)
        mids.append(0.5 * (e[:-1] + e[1:]))
    return np.concatenate(sels), np.concatenate(mids)


def _level(ev, a, b, best_val):
    """True when the objective is constant on ``[a, b]`` up to rounding."""
    vals = [ev.exact(x) for x in np.linspace(a, b, 5)]
    return max(vals) - min(vals) <= 64 * np.finfo(float).eps * max(abs(best_val), 1e-300)


def _flat_hint(ev, tied, edges, best_val, tol, refine_tol, max_pieces=64):
    tmin, tmax = float(np.min(tied)), float(np.max(tied))

    def stretch():
        # a smooth bottom can tie within tol over more than refine_tol; that is not flat
        if tmax - tmin > 10 * refine_tol and _level(ev, tmin, tmax, best_val):
            return (tmin, tmax)
        return None

    if edges is None:
        return stretch()

    def flat(p):
        a, b = edges[p], edges[p + 1]
        if b <= a:
            return True
        probes = a + (b - a) * np.array([0.02, 0.5, 0.98])
        return all(ev.exact(x) <= best_val + tol for x in probes)

    npieces = len(edges) - 1
    pl, pu = int(_piece_index(edges, tmin)), int(_piece_index(edges, tmax))
    if pu - pl > max_pieces or not all(flat(p) for p in range(pl, pu + 1)):
        return stretch()
    steps = 0
    while pl > 0 and steps < max_pieces and flat(pl - 1):
        pl -= 1
        steps += 1
    steps = 0
    while pu < npieces - 1 and steps < max_pieces and flat(pu + 1):
        pu += 1
        steps += 1
    return (float(edges[pl]), float(edges[pu + 1]))


# ------------------------------------------------------ location and scale

class _Profile:
    """Objective of (xi, nu), either at a fixed amplitude or minimised over it."""

    def __init__(self, xs, ys, template, loss, beta_bounds, tol):
        self.xs, self.ys = xs, ys
        self.n = len(xs)
        self.template, self.loss = template, loss
        self.blo, self.bhi = beta_bounds
        self.tol = tol
        self.yy = float(ys @ ys)
        self.evaluations = 0

    @property
    def closed_form(self) -> bool:
        return self.loss.kind == SQUARED

    def fmat(self, xi, nu):
        return self.template.eval((self.xs[None, :] - xi[:, None]) / nu[:, None])

    def squared_from_sums(self, sfy, sff):
        with np.errstate(divide="ignore", invalid="ignore"):
            b = np.where(sff > 0, sfy / sff, 0.0)
        b = np.clip(b, self.blo, self.bhi)
        return (self.yy - 2 * b * sfy + b * b * sff) / self.n, b

    def values(self, xi, nu, beta=None, tol=None):
        """Objective and amplitude at arrays of (xi, nu).

        Squared loss always profiles the amplitude out in closed form. Other
        losses use ``beta`` when given and a 1-D search otherwise.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        xi, nu = np.broadcast_arrays(xi, nu)
        vals = np.empty(xi.size)
        betas = np.empty(xi.size)
        step = max(1, 2_000_000 // max(self.n, 1))
        for s in range(0, xi.size, step):
            F = self.fmat(xi[s:s + step], nu[s:s + step])
            if self.closed_form:
                v, b = self.squared_from_sums(F @ self.ys, np.einsum("ij,ij->i", F, F))
            elif beta is not None:
                v = np.mean(self.loss.value(self.ys[None, :] - beta * F), axis=1)
                b = np.full(F.shape[0], float(beta))
            else:
                v, b = np.empty(F.shape[0]), np.empty(F.shape[0])
                for k, row in enumerate(F):
                    b[k], v[k] = self.beta_min(row, tol or self.tol)
            vals[s:s + step] = v
            betas[s:s + step] = b
        self.evaluations += xi.size
        return vals, betas

    def beta_min(self, frow, tol):
        """Best amplitude for one row of template values."""
        loss, ys = self.loss, self.ys
        act = frow != 0
        if not np.any(act):
            return float(np.clip(0.0, self.blo, self.bhi)), float(np.mean(loss.value(ys)))
        fa, ya = frow[act], ys[act]
        rest = float(np.sum(loss.value(ys[~act])))

        def g(b):
            return (rest + float(np.sum(loss.value(ya - b * fa)))) / self.n

        if self.bhi == self.blo:
            return self.blo, g(self.blo)
        if loss.kind == TUKEY:
            grid = np.linspace(self.blo, self.bhi, 33)
            gv = np.array([g(b) for b in grid])
            j = int(np.argmin(gv))
            a, c = grid[max(j - 1, 0)], grid[min(j + 1, 32)]
            b, val, _ = golden_section(g, a, c, tol)
            return b, val
        b, val, _ = golden_section(g, self.blo, self.bhi, tol)
        return b, val

    def exact(self, beta, xi, nu):
        r = self.ys - beta * self.template.eval((self.xs - xi) / nu)
        return float(np.mean(self.loss.value(r)))


def default_location_scale_box(dataset: Dataset, template: Template):
    lo, hi = default_shift_bounds(dataset, template)
    probe = np.linspace(*[v if np.isfinite(v) else 1.0 for v in template.support], 1001)
    fmax = float(np.max(np.abs(template.eval(probe)))) or 1.0
    B = 2.0 * (1.0 + float(np.max(np.abs(dataset.ys)))) / fmax
    return ((-B, B), (lo, hi), (0.25, 4.0))


def fit_location_scale(dataset: Dataset, template: Template, loss: Loss,
                       cfg: Optional[SearchConfig] = None) -> EstimationResult:
    """Approximate global minimiser over a ``(beta, xi, nu)`` box.

    A coarse ``(xi, nu)`` grid with the amplitude minimised out (closed form
    for squared loss, golden section otherwise) picks starting points. Each
    is refined by line searches along the ``xi`` and ``nu`` axes and along
    the directions that move a single jump of the rescaled template; for
    losses other than squared the amplitude is re-optimised between sweeps.
    Piecewise-constant templates are searched exactly along each line by a
    cumulative sweep over the breakpoints. Degenerate box sides pin a
    parameter.
    """
    if dataset.n == 0:
        raise EmptyDataset("cannot fit an empty dataset")
    cfg = cfg or SearchConfig()
    box = cfg.param_bounds or default_location_scale_box(dataset, template)
    try:
        (blo, bhi), (xlo, xhi), (nlo, nhi) = [tuple(map(float, b)) for b in box]
    except (TypeError, ValueError):
        raise InvalidBounds(f"expected three (lo, hi) pairs, got {box!r}") from None
    for lo_, hi_ in ((blo, bhi), (xlo, xhi), (nlo, nhi)):
        if not (np.isfinite(lo_) and np.isfinite(hi_)) or hi_ < lo_:
            raise InvalidBounds(f"bad box side [{lo_}, {hi_}]")
    if nlo <= 0:
        raise InvalidBounds("scale bounds must be positive")

    prof = _Profile(dataset.xs, dataset.ys, template, loss, (blo, bhi), cfg.refine_tol)
    box2 = ((xlo, xhi), (nlo, nhi))

    # coarse grid, spending the whole budget on the free axes
    free = [hi_ > lo_ for lo_, hi_ in box2]
    g = cfg.ls_grid_size
    sizes = [(g * g if sum(free) == 1 else g) if f else 1 for f in free]
    xg = np.linspace(xlo, xhi, sizes[0])
    ng = np.linspace(nlo, nhi, sizes[1])
    XI, NU = np.meshgrid(xg, ng, indexing="ij")
    XI, NU = XI.ravel(), NU.ravel()
    vals, betas = prof.values(XI, NU, tol=1e-4 * max(bhi - blo, 1e-12))
    order = np.argsort(vals, kind="stable")[: cfg.n_starts]
    steps = (xg[1] - xg[0] if xg.size > 1 else 0.0, ng[1] - ng[0] if ng.size > 1 else 0.0)

    dirs = [(1.0, 0.0), (0.0, 1.0)] + [(-float(d), 1.0) for d in template.jump_locations]
    best = None
    for k in order:
        state = _line_search_descent(prof, np.array([XI[k], NU[k]]), float(betas[k]),
                                     dirs, box2, steps, cfg)
        if best is None or state[2] < best[2]:
            best = state
    p, beta, _ = best
    if template.piecewise_constant and template.discontinuities:
        p = _centre_in_flat(prof, p, beta, box2)
    if prof.closed_form:
        beta = float(prof.values(p[0], p[1])[1][0])
    theta = (float(beta), float(p[0]), float(p[1]))
    return EstimationResult(theta, prof.exact(*theta), prof.evaluations, None)


def _direction_range(p, u, box2):
    """Interval of ``s`` keeping ``p + s u`` in the box."""
    smin, smax = -np.inf, np.inf
    for c in range(2):
        lo_, hi_ = box2[c]
        if u[c] > 0:
            smin, smax = max(smin, (lo_ - p[c]) / u[c]), min(smax, (hi_ - p[c]) / u[c])
        elif u[c] < 0:
            smin, smax = max(smin, (hi_ - p[c]) / u[c]), min(smax, (lo_ - p[c]) / u[c])
        elif not lo_ <= p[c] <= hi_:
            return 0.0, 0.0
    return smin, smax


def _line_breakpoints(prof, p, u, s_lo, s_hi):
    """Sorted ``s`` in ``(s_lo, s_hi)`` where some ``x_i`` crosses a jump.

    Returns ``(s, point_index)``.
    """
    out, idx = [], []
    for d in prof.template.jump_locations:
        rate = u[0] + u[1] * d
        if abs(rate) < 1e-14:
            continue
        s = (prof.xs - p[0] - p[1] * d) / rate
        keep = np.flatnonzero((s > s_lo) & (s < s_hi))
        out.append(s[keep])
        idx.append(keep)
    if not out:
        return np.empty(0), np.empty(0, int)
    s, i = np.concatenate(out), np.concatenate(idx)
    order = np.argsort(s, kind="stable")
    return s[order], i[order]


def _line_sweep(prof, p, u, s_lo, s_hi, beta):
    """Exact objective on every piece of a line, piecewise-constant templates only.

    Returns ``(edges, piece values, piece amplitudes)``.
    """
    bps, pidx = _line_breakpoints(prof, p, u, s_lo, s_hi)
    edges = np.unique(np.concatenate(([s_lo], bps, [s_hi])))
    mids = 0.5 * (edges[:-1] + edges[1:])
    tpl, xs, ys = prof.template, prof.xs, prof.ys
    q = p + mids[0] * u
    F0 = tpl.eval((xs - q[0]) / q[1])
    k = np.searchsorted(edges, bps)
    before = p[None, :] + mids[k - 1][:, None] * u[None, :]
    after = p[None, :] + mids[np.minimum(k, len(mids) - 1)][:, None] * u[None, :]
    xi_, yi = xs[pidx], ys[pidx]
    f_old = tpl.eval((xi_ - before[:, 0]) / before[:, 1])
    f_new = tpl.eval((xi_ - after[:, 0]) / after[:, 1])
    counts = np.searchsorted(k, np.arange(len(mids)), side="right")

    def accumulate(base, delta):
        return base + np.concatenate(([0.0], np.cumsum(delta)))[counts]

    prof.evaluations += len(mids)
    if prof.closed_form:
        sfy = accumulate(float(F0 @ ys), (f_new - f_old) * yi)
        sff = accumulate(float(F0 @ F0), f_new * f_new - f_old * f_old)
        v, b = prof.squared_from_sums(sfy, sff)
        return edges, v, b
    L = prof.loss.value
    tot = accumulate(float(np.sum(L(ys - beta * F0))), L(yi - beta * f_new) - L(yi - beta * f_old))
    return edges, tot / prof.n, np.full(len(mids), beta)


def _line_search_descent(prof, p, beta, dirs, box2, steps, cfg, max_cycles=200, max_cand=1000):
    """Cyclic line searches from ``p``; returns ``(p, beta, value)``."""
    tpl = prof.template
    sweep = tpl.piecewise_constant and bool(tpl.discontinuities)
    fixed = not prof.closed_form

    def at(xi, nu):
        return prof.values(xi, nu, beta if fixed else None)[0]

    if fixed:
        beta, val = prof.beta_min(prof.fmat(p[:1], p[1:])[0], prof.tol)
    else:
        val = float(at(p[0], p[1])[0])
    scale = max(steps) if max(steps) > 0 else 1.0
    width = 2.0 * scale
    for _ in range(max_cycles):
        tiny = TIE_RTOL * max(abs(val), 1e-300)
        improved = False
        for u in dirs:
            u = np.asarray(u)
            smin, smax = _direction_range(p, u, box2)
            if smax - smin <= 0:
                continue
            if sweep:
                edges, cv, _ = _line_sweep(prof, p, u, smin, smax, beta)
                j = int(np.argmin(cv))
                s_best, v_best = 0.5 * (edges[j] + edges[j + 1]), float(cv[j])
            else:
                s_best, v_best = _windowed_line(prof, p, u, smin, smax, width, at, cfg, max_cand)
            if v_best < val - tiny:
                p = p + s_best * u
                val = v_best
                improved = True
        if fixed:
            b_new, v_new = prof.beta_min(prof.fmat(p[:1], p[1:])[0], prof.tol)
            if v_new < val - tiny:
                beta, val = b_new, v_new
                improved = True
        if not improved:
            if sweep or width <= cfg.refine_tol:
                break
            width /= 4.0
        else:
            width = max(width, scale / 2.0)
    return p, beta, val


def _windowed_line(prof, p, u, smin, smax, width, at, cfg, max_cand):
    norm = float(np.hypot(*u))
    s_lo, s_hi = max(smin, -width / norm), min(smax, width / norm)
    bps, _ = _line_breakpoints(prof, p, u, s_lo, s_hi)
    if bps.size > max_cand:
        keep = np.argsort(np.abs(bps), kind="stable")[:max_cand]
        bps = np.sort(bps[keep])
        s_lo, s_hi = max(s_lo, bps[0] - 1e-12), min(s_hi, bps[-1] + 1e-12)
    edges = np.unique(np.concatenate(([s_lo], bps, [s_hi])))
    # breakpoints themselves too: a piece's infimum can sit on its closed end
    cand = np.unique(np.concatenate((np.linspace(s_lo, s_hi, 17), bps,
                                     0.5 * (edges[:-1] + edges[1:]))))
    pts = p[None, :] + cand[:, None] * u[None, :]
    cv = at(pts[:, 0], pts[:, 1])
    j = int(np.argmin(cv))
    s_best, v_best = cand[j], float(cv[j])
    a, b = max(j - 1, 0), min(j + 1, len(cand) - 1)
    if cand[b] > cand[a]:
        def h(s):
            q = p + s * u
            return float(at(q[0], q[1])[0])

        s2, v2, _ = golden_section(h, cand[a], cand[b], cfg.refine_tol / norm, cv[a], cv[b])
        if v2 < v_best:
            s_best, v_best = s2, v2
    return s_best, v_best


def _centre_in_flat(prof, p, beta, box2):
    """Move to the middle of the flat piece along each single-jump direction."""
    fixed = not prof.closed_form
    val = float(prof.values(p[0], p[1], beta if fixed else None)[0][0])
    tol = TIE_RTOL * max(abs(val), 1e-300)
    for d in prof.template.jump_locations:
        u = np.array([-float(d), 1.0])
        smin, smax = _direction_range(p, u, box2)
        if smax - smin <= 0:
            u = np.array([1.0, 0.0])
            smin, smax = _direction_range(p, u, box2)
            if smax - smin <= 0:
                continue
        bps, _ = _line_breakpoints(prof, p, u, smin, smax)
        left, right = bps[bps < 0], bps[bps > 0]
        a = left[-1] if left.size else smin
        b = right[0] if right.size else smax
        q = p + 0.5 * (a + b) * u
        if float(prof.values(q[0], q[1], beta if fixed else None)[0][0]) <= val + tol:
            p = q
    return p


# ---------------------------------------------------------------- periodic

def fit_periodic_correlation(dataset: Dataset, template: Template) -> EstimationResult:
    """Grid matched filter ``argmax_t sum_i f((i - t)/n) y_i`` over ``t = 1..n``.

    The dataset must sit on the regular grid ``x_i = i/n`` (in order) and the
    template must be 1-periodic. Ties go to the smallest index. The result's
    ``theta`` is ``t/n`` and ``extra['index']`` holds ``t``.
    """
    n = dataset.n
    if n == 0:
        raise EmptyDataset("cannot fit an empty dataset")
    if not template.periodic:
        raise ValueError("the correlation estimator needs a periodic template")
    i = np.arange(1, n + 1)
    if not np.allclose(dataset.xs, i / n, rtol=0, atol=1e-9):
        raise NotRegularGrid("design points must be x_i = i/n in order")
    g = template.eval(np.arange(n) / n)  # g[k] = f(k/n), k = (i - t) mod n
    ys = dataset.ys
    scores = np.empty(n)
    step = max(1, 4_000_000 // n)
    for s in range(0, n, step):
        t = i[s:s + step]
        k = np.mod(i[None, :] - t[:, None], n)
        scores[s:s + step] = g[k] @ ys
    tol = TIE_RTOL * max(float(np.abs(g).sum() * np.abs(ys).max()), 1e-300)
    best = float(scores.max())
    t_hat = int(np.flatnonzero(scores >= best - tol)[0]) + 1
    return EstimationResult(t_hat / n, float(-best), n, None,
                            {"index": t_hat, "scores": scores})


# -------------------------------------------------------- sklearn wrappers

def _as_1d_design(X):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    return X


class ShiftMEstimator(RegressorMixin, BaseEstimator):
    """Shift M-estimator behind the scikit-learn regressor API.

    ``X`` holds the design points (one column), ``y`` the observations.
    After fitting, ``theta_`` is the estimated shift and ``predict`` returns
    the shifted template.

    Parameters
    ----------
    template : str or Template
        Built-in name (``"A"``..``"E"``, ``"stump:<a>"``), JSON path or object.
    loss : str or Loss
        ``"squared"``, ``"absolute"``, ``"huber[:c]"`` or ``"tukey[:c]"``.
    bounds : (float, float), optional
        Search interval for the shift.
    """

    def __init__(self, template="A", loss="squared", bounds=None, coarse_grid_size=256,
                 refine_tol=1e-7, use_breakpoints=True, n_starts=5):
        self.template = template
        self.loss = loss
        self.bounds = bounds
        self.coarse_grid_size = coarse_grid_size
        self.refine_tol = refine_tol
        self.use_breakpoints = use_breakpoints
        self.n_starts = n_starts

    def _config(self, bounds):
        return SearchConfig(param_bounds=bounds, coarse_grid_size=self.coarse_grid_size,
                            refine_tol=self.refine_tol, use_breakpoints=self.use_breakpoints,
                            n_starts=self.n_starts)

    def fit(self, X, y):
        X, y = check_X_y(_as_1d_design(X), y, y_numeric=True, ensure_min_samples=1)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single design column, got {X.shape[1]}")
        self.template_ = resolve_template(self.template)
        self.loss_ = parse_loss(self.loss)
        data = Dataset(X[:, 0], y)
        self.result_ = fit_shift(data, self.template_, self.loss_,
                                 self._config(None if self.bounds is None else tuple(self.bounds)))
        self.theta_ = float(self.result_.theta)
        self.minimizer_interval_ = self.result_.minimizer_interval_hint
        self.objective_ = self.result_.objective_at_min
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "theta_")
        X = check_array(_as_1d_design(X))
        return self.template_.shift_eval(X[:, 0], self.theta_)


class LocationScaleMEstimator(RegressorMixin, BaseEstimator):
    """Amplitude-location-scale M-estimator with the scikit-learn API.

    Fitted attributes are ``beta_``, ``xi_`` and ``nu_``; ``predict``
    returns ``beta_ * f((x - xi_) / nu_)``.
    """

    def __init__(self, template="C", loss="squared", box=None, ls_grid_size=21,
                 refine_tol=1e-7, n_starts=5):
        self.template = template
        self.loss = loss
        self.box = box
        self.ls_grid_size = ls_grid_size
        self.refine_tol = refine_tol
        self.n_starts = n_starts

    def fit(self, X, y):
        X, y = check_X_y(_as_1d_design(X), y, y_numeric=True, ensure_min_samples=1)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single design column, got {X.shape[1]}")
        self.template_ = resolve_template(self.template)
        self.loss_ = parse_loss(self.loss)
        cfg = SearchConfig(param_bounds=self.box, ls_grid_size=self.ls_grid_size,
                           refine_tol=self.refine_tol, n_starts=self.n_starts)
        self.result_ = fit_location_scale(Dataset(X[:, 0], y), self.template_, self.loss_, cfg)
        self.beta_, self.xi_, self.nu_ = self.result_.theta
        self.objective_ = self.result_.objective_at_min
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "beta_")
        X = check_array(_as_1d_design(X))
        return self.beta_ * self.template_.eval((X[:, 0] - self.xi_) / self.nu_)
