"""Shift estimation for known templates under robust losses."""
from .datagen import Dataset, generate_agnostic, generate_location_scale, generate_shift
from .distributions import DesignModel, NoiseModel, design_points, make_rng
from .estimator import (EstimationResult, LocationScaleMEstimator, SearchConfig,
                        ShiftMEstimator, fit_location_scale, fit_periodic_correlation,
                        fit_shift, objective)
from .exceptions import ShiftMatchError
from .experiments import (ExperimentConfig, ExperimentReport, ks_one_sample, ks_two_sample,
                          rate_slope, run_monte_carlo)
from .limitlaw import (MarkedProcessSpec, MinimizerInterval, location_scale_limit_samples,
                       midpoint_sample, process_spec_for_template, simulate_min_interval)
from .losses import Loss, parse_loss
from .templates import Template, builtin_template, piecewise_polynomial, resolve_template
from .theory import (AsymptoticReport, asymptotic_variance_shift, c_phi_loss, delta,
                     jump_constant, location_scale_asymptotics, population_risk,
                     relative_efficiency)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticReport", "Dataset", "DesignModel", "EstimationResult", "ExperimentConfig",
    "ExperimentReport", "LocationScaleMEstimator", "Loss", "MarkedProcessSpec",
    "MinimizerInterval", "NoiseModel", "SearchConfig", "ShiftMEstimator", "ShiftMatchError",
    "Template", "asymptotic_variance_shift", "builtin_template", "c_phi_loss", "delta",
    "design_points", "fit_location_scale", "fit_periodic_correlation", "fit_shift",
    "generate_agnostic", "generate_location_scale", "generate_shift", "jump_constant",
    "ks_one_sample", "ks_two_sample", "location_scale_asymptotics", "make_rng",
    "midpoint_sample", "objective", "parse_loss", "piecewise_polynomial", "population_risk",
    "process_spec_for_template", "rate_slope", "relative_efficiency", "resolve_template",
    "run_monte_carlo", "simulate_min_interval",
]
