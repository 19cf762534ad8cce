"""Synthetic data from the shift, amplitude-location-scale and agnostic models."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .distributions import DesignModel, NoiseModel, design_points
from .exceptions import EmptyDataset, InvalidScale
from .templates import Template


@dataclass
class Dataset:
    """Paired observations plus how they were generated."""

    xs: np.ndarray
    ys: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float).ravel()
        self.ys = np.asarray(self.ys, dtype=float).ravel()
        if self.xs.shape != self.ys.shape:
            raise ValueError("xs and ys must have the same length")
        self.meta.setdefault("n", len(self.xs))

    def __len__(self):
        return len(self.xs)

    @property
    def n(self) -> int:
        return len(self.xs)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            for x, y in zip(self.xs, self.ys):
                w.writerow([f"{x:.17g}", f"{y:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [h.strip().lower() for h in rows[0]] != ["x", "y"]:
            raise ValueError(f"{path}: expected a header row 'x,y'")
        body = [r for r in rows[1:] if r]
        if not body:
            raise EmptyDataset(f"{path}: no data rows")
        arr = np.array(body, dtype=float)
        return cls(arr[:, 0], arr[:, 1], {"source": str(Path(path))})


def _xz(design, noise, n, mode, rng):
    if n < 1:
        raise ValueError("n must be >= 1")
    # design before noise: the draw order is part of the reproducibility contract
    xs = design_points(design, mode, n, rng)
    zs = noise.sample(rng, n)
    return xs, zs


def generate_shift(template: Template, theta_star: float, design: DesignModel,
                   noise: NoiseModel, n: int, mode: str,
                   rng: np.random.Generator) -> Dataset:
    """``y_i = f(x_i - theta*) + z_i``."""
    xs, zs = _xz(design, noise, n, mode, rng)
    ys = template.shift_eval(xs, theta_star) + zs
    meta = {"model": "shift", "theta_star": float(theta_star), "n": n, "mode": mode,
            "template": template.name, "noise": str(noise), "design": str(design)}
    return Dataset(xs, ys, meta)


def generate_location_scale(template: Template, params, design: DesignModel,
                            noise: NoiseModel, n: int, mode: str,
                            rng: np.random.Generator) -> Dataset:
    """``y_i = beta* f((x_i - xi*) / nu*) + z_i`` with ``params = (beta*, xi*, nu*)``."""
    beta, xi, nu = map(float, params)
    if not nu > 0:
        raise InvalidScale(f"scale must be positive, got {nu}")
    xs, zs = _xz(design, noise, n, mode, rng)
    ys = beta * template.eval((xs - xi) / nu) + zs
    meta = {"model": "location_scale", "beta_star": beta, "xi_star": xi, "nu_star": nu,
            "n": n, "mode": mode, "template": template.name, "noise": str(noise),
            "design": str(design)}
    return Dataset(xs, ys, meta)


def generate_agnostic(g: Callable, design: DesignModel, noise: NoiseModel, n: int,
                      mode: str, rng: np.random.Generator) -> Dataset:
    """``y_i = g(x_i) + z_i`` for an arbitrary (bounded) vectorised ``g``."""
    xs, zs = _xz(design, noise, n, mode, rng)
    ys = np.asarray(g(xs), dtype=float) + zs
    meta = {"model": "agnostic", "n": n, "mode": mode, "noise": str(noise),
            "design": str(design)}
    return Dataset(xs, ys, meta)
