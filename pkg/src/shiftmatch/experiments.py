"""Monte Carlo harness, Kolmogorov-Smirnov statistics and rate regression.

Repeat ``r`` of a scenario at sample size ``n`` draws its data from
``make_rng(seed, *stream, n, r)``, so results do not depend on how repeats
are spread over worker processes.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import theory
from .datagen import generate_location_scale, generate_shift
from .distributions import make_rng, parse_design, parse_noise
from .estimator import SearchConfig, fit_location_scale, fit_shift
from .exceptions import ConfigError, EmptySample, NonPositiveInput, ShiftMatchError
from .limitlaw import midpoint_sample, process_spec_for_template
from .losses import SQUARED, parse_loss
from .templates import resolve_template

SCALINGS = {"sqrt_n": lambda n: np.sqrt(n), "n": lambda n: float(n), "none": lambda n: 1.0}
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


# ------------------------------------------------------------ statistics

def ks_one_sample(sample, cdf: Callable) -> float:
    """``sup_x |F_n(x) - F(x)|`` for a continuous reference CDF."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise EmptySample("KS statistic of an empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_two_sample(a, b) -> float:
    """``sup_x |F_a(x) - F_b(x)|``."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS statistic needs two nonempty samples")
    pts = np.concatenate((a, b))
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def rate_slope(ns: Sequence[float], mean_abs_errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(n)``."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(mean_abs_errors, dtype=float)
    if ns.size != errs.size or ns.size < 3:
        raise ValueError("rate_slope needs at least three (n, error) pairs")
    if np.any(ns <= 0) or np.any(errs <= 0):
        raise NonPositiveInput("sample sizes and errors must be positive")
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo scenario.

    ``theta_star`` is a float for ``model='shift'`` and a ``(beta, xi, nu)``
    triple for ``model='location_scale'``. ``bounds`` defaults to
    ``theta* +/- 0.25`` (shift) or to ``beta in [beta/5, 5 beta]``,
    ``xi +/- 0.25``, ``nu in [nu/2, 2 nu]`` (location-scale).
    ``stream`` adds keys to every derived seed so that scenarios sharing a
    master seed draw independent data.
    """

    template: str = "A"
    theta_star: object = 0.0
    loss: str = "squared"
    noise: str = "gaussian:1"
    design: str = "uniform:0,1"
    mode: str = "random"
    n: Tuple[int, ...] = (10000,)
    repeats: int = 200
    seed: int = 0
    scaling: str = "sqrt_n"
    model: str = "shift"
    bounds: Optional[tuple] = None
    grid: int = 256
    tol: float = 1e-7
    stream: Tuple[int, ...] = ()
    limit_repeats: int = 0

    def __post_init__(self):
        n = (self.n,) if np.isscalar(self.n) else tuple(self.n)
        object.__setattr__(self, "n", tuple(int(v) for v in n))
        if any(v < 1 for v in self.n) or not self.n:
            raise ConfigError("sample sizes must be >= 1")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.scaling not in SCALINGS:
            raise ConfigError(f"scaling must be one of {sorted(SCALINGS)}")
        if self.model not in ("shift", "location_scale"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.model == "location_scale" and np.ndim(self.theta_star) == 0:
            raise ConfigError("location_scale needs theta_star = (beta, xi, nu)")
        # fail early on names that do not resolve
        resolve_template(self.template)
        parse_loss(self.loss)
        parse_noise(self.noise)
        parse_design(self.design)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        d["stream"] = list(self.stream)
        if isinstance(self.theta_star, (tuple, list)):
            d["theta_star"] = list(self.theta_star)
        if self.bounds is not None:
            d["bounds"] = json.loads(json.dumps(self.bounds))
        return d

    @property
    def theory_silent(self) -> bool:
        """Squared loss under noise without a second moment."""
        return parse_loss(self.loss).kind == SQUARED and not np.isfinite(
            parse_noise(self.noise).variance)

    def search_config(self) -> SearchConfig:
        if self.model == "shift":
            t = float(self.theta_star)
            bounds = self.bounds or (t - 0.25, t + 0.25)
        else:
            b, x, v = map(float, self.theta_star)
            bounds = self.bounds or ((b / 5, 5 * b) if b > 0 else (5 * b, b / 5),
                                     (x - 0.25, x + 0.25), (v / 2, 2 * v))
        return SearchConfig(param_bounds=tuple(bounds), coarse_grid_size=self.grid,
                            refine_tol=self.tol)


# ---------------------------------------------------------------- report

def _summary(scaled: np.ndarray) -> dict:
    if scaled.size == 0:
        return {"mean_abs_scaled_error": None, "quantiles": {}}
    q = np.quantile(scaled, QUANTILES)
    return {"mean_abs_scaled_error": float(np.mean(np.abs(scaled))),
            "quantiles": {str(k): float(v) for k, v in zip(QUANTILES, q)}}


@dataclass
class ScenarioResult:
    """Outcome at one sample size.

    ``errors`` holds the raw errors ``theta_hat - theta*`` (a dict per
    parameter for the location-scale model) and ``scaled_errors`` the
    rate-scaled ones.
    """

    n: int
    errors: object
    scaled_errors: object
    failures: List[Tuple[int, str]] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def mean_abs_scaled_error(self):
        if isinstance(self.scaled_errors, dict):
            return {k: _summary(v)["mean_abs_scaled_error"] for k, v in self.scaled_errors.items()}
        return _summary(self.scaled_errors)["mean_abs_scaled_error"]

    def to_dict(self) -> dict:
        if isinstance(self.scaled_errors, dict):
            body = {k: {**_summary(v), "scaled_errors": v.tolist()}
                    for k, v in self.scaled_errors.items()}
        else:
            body = {**_summary(self.scaled_errors),
                    "scaled_errors": self.scaled_errors.tolist()}
        return {"n": self.n, **body, "failures": [list(f) for f in self.failures],
                **self.extra}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    results: List[ScenarioResult]
    extra: dict = field(default_factory=dict)

    def result(self, n: int) -> ScenarioResult:
        for r in self.results:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(),
                "theory_silent": self.config.theory_silent,
                "results": [r.to_dict() for r in self.results],
                **self.extra}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def write_error_csvs(self, directory) -> List[Path]:
        """One single-column CSV of scaled errors per sample size (and parameter)."""
        out = []
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for r in self.results:
            cols = r.scaled_errors if isinstance(r.scaled_errors, dict) else {"": r.scaled_errors}
            for name, vals in cols.items():
                p = directory / f"errors_n{r.n}{'_' + name if name else ''}.csv"
                with open(p, "w", newline="") as fh:
                    fh.write("scaled_error\n")
                    fh.writelines(f"{repr(float(v))}\n" for v in vals)
                out.append(p)
        return out


# ----------------------------------------------------------------- running

def _one_repeat(args):
    """Fit one dataset; returns ``(r, errors or None, error name or None)``."""
    cfg, n, r = args
    template = resolve_template(cfg.template)
    loss = parse_loss(cfg.loss)
    noise = parse_noise(cfg.noise)
    design = parse_design(cfg.design)
    rng = make_rng(cfg.seed, *cfg.stream, n, r)
    sc = cfg.search_config()
    try:
        if cfg.model == "shift":
            ts = float(cfg.theta_star)
            data = generate_shift(template, ts, design, noise, n, cfg.mode, rng)
            res = fit_shift(data, template, loss, sc)
            return r, res.midpoint - ts, None
        truth = tuple(map(float, cfg.theta_star))
        data = generate_location_scale(template, truth, design, noise, n, cfg.mode, rng)
        res = fit_location_scale(data, template, loss, sc)
        return r, tuple(e - t for e, t in zip(res.theta, truth)), None
    except ShiftMatchError as exc:
        return r, None, type(exc).__name__


def _map(func, jobs, workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [func(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs, chunksize=chunk))


def run_monte_carlo(cfg: ExperimentConfig, workers: Optional[int] = 1) -> ExperimentReport:
    """Run every repeat at every sample size and aggregate in repeat order."""
    jobs = [(cfg, n, r) for n in cfg.n for r in range(cfg.repeats)]
    report = _report_from(cfg, jobs, _map(_one_repeat, jobs, workers))
    results = report.results
    _attach_limit_checks(report)
    if len(cfg.n) >= 3 and cfg.model == "shift":
        means = [r.mean_abs_scaled_error for r in results]
        if all(m is not None and m > 0 for m in means):
            raw = [float(np.mean(np.abs(r.errors))) for r in results]
            report.extra["rate_slope"] = rate_slope(cfg.n, raw)
    return report


def _attach_limit_checks(report: ExperimentReport) -> None:
    cfg = report.config
    if cfg.model != "shift" or cfg.theory_silent:
        return
    template = resolve_template(cfg.template)
    loss, noise = parse_loss(cfg.loss), parse_noise(cfg.noise)
    design = parse_design(cfg.design)
    ts = float(cfg.theta_star)
    if template.is_smooth and cfg.scaling == "sqrt_n":
        try:
            tau2 = theory.asymptotic_variance_shift(template, design, loss, noise, ts).tau2
        except ShiftMatchError:
            return
        ref = stats.norm(scale=np.sqrt(tau2)).cdf
        for r in report.results:
            if r.scaled_errors.size:
                r.extra["ks_vs_normal"] = {"statistic": ks_one_sample(r.scaled_errors, ref),
                                           "tau2": tau2}
    elif template.discontinuities and cfg.scaling == "n" and cfg.limit_repeats > 0:
        spec = process_spec_for_template(template, design, loss, noise, ts)
        mids = midpoint_sample(spec, cfg.limit_repeats, cfg.seed, (*cfg.stream, 1))
        for r in report.results:
            if r.scaled_errors.size:
                r.extra["ks_vs_poisson_midpoints"] = {
                    "statistic": ks_two_sample(r.scaled_errors, mids),
                    "limit_repeats": cfg.limit_repeats}


# ------------------------------------------------------------------ tables

NOISE_ROWS = (("Normal", "gaussian:1"), ("T3", "t:3"), ("Cauchy", "cauchy"))
LOSS_COLUMNS = ("squared", "absolute", "huber", "tukey")
RATE_NS = (100, 500, 1000, 5000, 10000)


def table_scenarios(table: int, repeats: int, seed: int, n: int = 10000) -> List[ExperimentConfig]:
    """The scenarios behind one results table, in row-major order."""
    if table in (1, 3):
        templates = ("A", "B") if table == 1 else ("C", "D", "E")
        scaling = "sqrt_n" if table == 1 else "n"
        out = []
        for ti, tpl in enumerate(templates):
            for ni, (_, noise) in enumerate(NOISE_ROWS):
                for li, loss in enumerate(LOSS_COLUMNS):
                    out.append(ExperimentConfig(template=tpl, loss=loss, noise=noise, n=(n,),
                                                repeats=repeats, seed=seed, scaling=scaling,
                                                stream=(table, ti, ni, li)))
        return out
    if table in (2, 4):
        tpl, scaling = ("A", "sqrt_n") if table == 2 else ("E", "n")
        return [ExperimentConfig(template=tpl, loss="absolute", noise="t:3", n=RATE_NS,
                                 repeats=repeats, seed=seed, scaling=scaling,
                                 stream=(table,))]
    raise ConfigError(f"no table {table}")


def run_table(table: int, repeats: int, seed: int, workers: Optional[int] = 1,
              n: int = 10000) -> Tuple[List[str], List[list], List[ExperimentReport]]:
    """Header, rows and per-scenario reports of one table.

    All repeats of all scenarios go through one worker pool.
    """
    cfgs = table_scenarios(table, repeats, seed, n)
    jobs = [(c, nn, r) for c in cfgs for nn in c.n for r in range(c.repeats)]
    outcomes = _map(_one_repeat, jobs, workers)
    reports, k = [], 0
    for c in cfgs:
        m = len(c.n) * c.repeats
        reports.append(_report_from(c, jobs[k:k + m], outcomes[k:k + m]))
        k += m
    if table in (1, 3):
        header = ["template", "noise", *LOSS_COLUMNS]
        rows = []
        it = iter(reports)
        for tpl in (("A", "B") if table == 1 else ("C", "D", "E")):
            for label, _ in NOISE_ROWS:
                rows.append([tpl, label, *[next(it).results[0].mean_abs_scaled_error
                                           for _ in LOSS_COLUMNS]])
        return header, rows, reports
    header = ["n", "mean_abs_scaled_error"]
    rows = [[r.n, r.mean_abs_scaled_error] for r in reports[0].results]
    return header, rows, reports


def _report_from(cfg, jobs, outcomes) -> ExperimentReport:
    results = []
    for n in cfg.n:
        rows = sorted((o for (_, nn, _), o in zip(jobs, outcomes) if nn == n), key=lambda o: o[0])
        ok = [o[1] for o in rows if o[2] is None]
        failures = [(o[0], o[2]) for o in rows if o[2] is not None]
        if cfg.model == "shift":
            errs = np.array(ok, dtype=float)
            scaled = errs * SCALINGS[cfg.scaling](n)
        else:
            arr = np.array(ok, dtype=float).reshape(-1, 3)
            errs = {"beta": arr[:, 0], "xi": arr[:, 1], "nu": arr[:, 2]}
            scaled = {"beta": arr[:, 0] * np.sqrt(n), "xi": arr[:, 1] * n, "nu": arr[:, 2] * n}
        results.append(ScenarioResult(n, errs, scaled, failures))
    return ExperimentReport(cfg, results)


def write_table_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else
                        ("" if v is None else v) for v in row])


def run_tables(out_dir, repeats: int = 200, seed: int = 0, workers: Optional[int] = 1,
               tables: Sequence[int] = (1, 2, 3, 4)) -> List[Path]:
    """Write ``table{k}.csv`` for each requested table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in tables:
        header, rows, _ = run_table(t, repeats, seed, workers)
        p = out_dir / f"table{t}.csv"
        write_table_csv(p, header, rows)
        paths.append(p)
    return paths
