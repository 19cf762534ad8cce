"""Command-line interface: ``shiftmatch {fit,theory,limitlaw,experiment,tables}``.

Exit status is 0 on success, 1 on a usage error and 2 when a computation
fails (the error class name is printed). Values are resolved as
built-in default < ``--config`` JSON file < explicit flag; ``--print-config``
prints the resolved values and exits.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import theory
from .datagen import Dataset
from .distributions import parse_design, parse_noise
from .estimator import SearchConfig, fit_location_scale, fit_periodic_correlation, fit_shift
from .exceptions import ConfigError, ShiftMatchError, UnknownTemplate, UnsupportedLoss
from .experiments import ExperimentConfig, run_monte_carlo, run_tables
from .limitlaw import MarkedProcessSpec, midpoint_sample, process_spec_for_template
from .losses import parse_loss
from .templates import resolve_template

USAGE_ERRORS = (ConfigError, UnknownTemplate, UnsupportedLoss)

DEFAULTS = {
    "template": "A",
    "theta_star": 0.0,
    "beta": 1.0,
    "xi": 0.0,
    "nu": 1.0,
    "loss": "squared",
    "noise": "gaussian:1",
    "design": "uniform:0,1",
    "mode": "random",
    "n": "10000",
    "repeats": 200,
    "seed": 0,
    "scaling": "sqrt_n",
    "bounds": None,
    "grid": 256,
    "tol": 1e-7,
    "out": ".",
    "workers": None,
    "model": "shift",
    "data": None,
    "tables": "1,2,3,4",
    "limit_repeats": 0,
    "process": "shift",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        sys.stderr.write(f"\nerror: {message}\n")
        raise SystemExit(1)


def _common(p, *names):
    add = {
        "template": lambda: p.add_argument("--template", help="A..E, stump:<a>, name:periodic or a JSON file (default A)"),
        "theta_star": lambda: p.add_argument("--theta-star", dest="theta_star", type=float, help="true shift (default 0)"),
        "lsparams": lambda: (p.add_argument("--beta", type=float, help="true amplitude (default 1)"),
                             p.add_argument("--xi", type=float, help="true location (default 0)"),
                             p.add_argument("--nu", type=float, help="true scale (default 1)")),
        "loss": lambda: p.add_argument("--loss", help="squared | absolute | huber[:c] | tukey[:c] (default squared)"),
        "noise": lambda: p.add_argument("--noise", help="gaussian:<sd> | t:<df> | cauchy | laplace:<b> (default gaussian:1)"),
        "design": lambda: p.add_argument("--design", help="uniform:a,b (default uniform:0,1)"),
        "mode": lambda: p.add_argument("--mode", choices=["random", "fixed", "periodic"], help="design mode (default random)"),
        "n": lambda: p.add_argument("--n", help="sample size or comma list (default 10000)"),
        "repeats": lambda: p.add_argument("--repeats", type=int, help="Monte Carlo repeats (default 200)"),
        "seed": lambda: p.add_argument("--seed", type=int, help="master seed (default 0)"),
        "scaling": lambda: p.add_argument("--scaling", choices=["sqrt_n", "n", "none"], help="error scaling (default sqrt_n)"),
        "bounds": lambda: p.add_argument("--bounds", help="lo,hi for a shift; b0,b1;x0,x1;v0,v1 for location-scale"),
        "grid": lambda: p.add_argument("--grid", type=int, help="coarse grid size (default 256)"),
        "tol": lambda: p.add_argument("--tol", type=float, help="refinement tolerance (default 1e-7)"),
        "out": lambda: p.add_argument("--out", help="output directory (default .)"),
        "workers": lambda: p.add_argument("--workers", type=int, help="worker processes (default: all cores)"),
    }
    for name in names:
        add[name]()
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shiftmatch", description="Template shift M-estimation toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("fit", help="fit a dataset CSV (header x,y) and write fit.json")
    p.add_argument("--data", help="dataset CSV")
    p.add_argument("--model", choices=["shift", "location_scale", "periodic"], help="default shift")
    _common(p, "template", "loss", "bounds", "grid", "tol", "out")

    p = sub.add_parser("theory", help="asymptotic constants as JSON (theory.json)")
    _common(p, "template", "theta_star", "loss", "noise", "design", "out")

    p = sub.add_parser("limitlaw", help="limit-process midpoints as a one-column CSV")
    p.add_argument("--process", choices=["shift", "xi", "nu"],
                   help="shift process, or the location / scale process (default shift)")
    _common(p, "template", "theta_star", "loss", "noise", "design", "repeats", "seed", "out")

    p = sub.add_parser("experiment", help="run one Monte Carlo scenario")
    p.add_argument("--model", choices=["shift", "location_scale"], help="default shift")
    p.add_argument("--limit-repeats", dest="limit_repeats", type=int,
                   help="limit-process draws for the KS comparison (default 0: skip)")
    _common(p, "template", "theta_star", "lsparams", "loss", "noise", "design", "mode", "n",
            "repeats", "seed", "scaling", "bounds", "grid", "tol", "out", "workers")

    p = sub.add_parser("tables", help="write table1.csv .. table4.csv")
    p.add_argument("--tables", help="comma list of tables to run (default 1,2,3,4)")
    _common(p, "repeats", "seed", "out", "workers")
    return parser


def _resolve(args) -> dict:
    conf = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            conf.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "print_config"):
            conf[k] = v
    return conf


def _parse_bounds(text, model):
    if text is None:
        return None
    if not isinstance(text, str):
        return text
    try:
        if model == "location_scale":
            parts = [tuple(float(v) for v in part.split(",")) for part in text.split(";")]
            if len(parts) != 3 or any(len(q) != 2 for q in parts):
                raise ValueError
            return tuple(parts)
        lo, hi = (float(v) for v in text.split(","))
        return (lo, hi)
    except ValueError:
        raise UsageError(f"bad --bounds {text!r}") from None


def _ns(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"bad --n {text!r}") from None


def _dump(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _out_dir(conf) -> Path:
    out = Path(conf["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(conf) -> None:
    if not conf["data"]:
        raise UsageError("fit needs --data")
    data = Dataset.from_csv(conf["data"])
    template = resolve_template(conf["template"])
    model = conf["model"]
    if model == "periodic":
        res = fit_periodic_correlation(data, template)
        res.extra.pop("scores", None)
    else:
        loss = parse_loss(conf["loss"])
        cfg = SearchConfig(param_bounds=_parse_bounds(conf["bounds"], model),
                           coarse_grid_size=conf["grid"], refine_tol=conf["tol"])
        fitter = fit_shift if model == "shift" else fit_location_scale
        res = fitter(data, template, loss, cfg)
    out = res.to_dict()
    _dump(out, _out_dir(conf) / "fit.json")
    print(json.dumps(out, indent=2))


def cmd_theory(conf) -> None:
    template = resolve_template(conf["template"])
    loss, noise = parse_loss(conf["loss"]), parse_noise(conf["noise"])
    design = parse_design(conf["design"])
    ts = float(conf["theta_star"])
    if template.is_smooth:
        out = theory.asymptotic_variance_shift(template, design, loss, noise, ts).to_dict()
    else:
        out = {"jump_constant": theory.jump_constant(template, design, ts),
               "c_phi_loss": theory.c_phi_loss(loss, noise),
               "location_scale": theory.location_scale_asymptotics(
                   template, design, loss, noise, (1.0, ts, 1.0)).to_dict()}
    _dump(out, _out_dir(conf) / "theory.json")
    print(json.dumps(out, indent=2))


def cmd_limitlaw(conf) -> None:
    template = resolve_template(conf["template"])
    loss, noise = parse_loss(conf["loss"]), parse_noise(conf["noise"])
    design = parse_design(conf["design"])
    ts = float(conf["theta_star"])
    proc = conf["process"]
    if proc == "shift":
        spec = process_spec_for_template(template, design, loss, noise, ts)
    else:
        asym = theory.location_scale_asymptotics(template, design, loss, noise, (1.0, ts, 1.0))
        rates = asym.xi_intensities if proc == "xi" else asym.nu_intensities
        spec = MarkedProcessSpec(tuple((r, j) for r, j in zip(rates, asym.jumps) if r > 0),
                                 noise, loss)
    mids = midpoint_sample(spec, int(conf["repeats"]), int(conf["seed"]))
    path = _out_dir(conf) / "midpoints.csv"
    with open(path, "w", newline="") as fh:
        fh.write("midpoint\n")
        fh.writelines(f"{repr(float(v))}\n" for v in mids)
    print(str(path))


def _experiment_config(conf) -> ExperimentConfig:
    model = conf["model"]
    theta = (float(conf["theta_star"]) if model == "shift"
             else (float(conf["beta"]), float(conf["xi"]), float(conf["nu"])))
    return ExperimentConfig(template=str(conf["template"]), theta_star=theta,
                            loss=str(conf["loss"]), noise=str(conf["noise"]),
                            design=str(conf["design"]), mode=conf["mode"], n=_ns(conf["n"]),
                            repeats=int(conf["repeats"]), seed=int(conf["seed"]),
                            scaling=conf["scaling"], model=model,
                            bounds=_parse_bounds(conf["bounds"], model),
                            grid=int(conf["grid"]), tol=float(conf["tol"]),
                            limit_repeats=int(conf["limit_repeats"]))


def cmd_experiment(conf) -> None:
    cfg = _experiment_config(conf)
    report = run_monte_carlo(cfg, workers=conf["workers"])
    out = _out_dir(conf)
    report.to_json(out / "report.json")
    report.write_error_csvs(out)
    failures = sum(len(r.failures) for r in report.results)
    for r in report.results:
        print(f"n={r.n} mean_abs_scaled_error={r.mean_abs_scaled_error}")
    if failures:
        print(f"{failures} repeat(s) failed; see report.json", file=sys.stderr)


def cmd_tables(conf) -> None:
    try:
        which = [int(v) for v in str(conf["tables"]).split(",")]
    except ValueError:
        raise UsageError(f"bad --tables {conf['tables']!r}") from None
    paths = run_tables(_out_dir(conf), repeats=int(conf["repeats"]), seed=int(conf["seed"]),
                       workers=conf["workers"], tables=which)
    for p in paths:
        print(str(p))


COMMANDS = {"fit": cmd_fit, "theory": cmd_theory, "limitlaw": cmd_limitlaw,
            "experiment": cmd_experiment, "tables": cmd_tables}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        conf = _resolve(args)
        keep = {k: conf[k] for k in DEFAULTS_FOR[args.command]}
        if args.print_config:
            print(json.dumps(keep, indent=2, sort_keys=True, default=str))
            return 0
        COMMANDS[args.command](conf)
    except (UsageError, *USAGE_ERRORS) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ShiftMatchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


DEFAULTS_FOR = {
    "fit": ("data", "model", "template", "loss", "bounds", "grid", "tol", "out"),
    "theory": ("template", "theta_star", "loss", "noise", "design", "out"),
    "limitlaw": ("template", "theta_star", "loss", "noise", "design", "repeats", "seed", "out",
                 "process"),
    "experiment": ("template", "theta_star", "beta", "xi", "nu", "loss", "noise", "design",
                   "mode", "n", "repeats", "seed", "scaling", "bounds", "grid", "tol", "out",
                   "workers", "model", "limit_repeats"),
    "tables": ("repeats", "seed", "out", "workers", "tables"),
}


if __name__ == "__main__":
    sys.exit(main())
