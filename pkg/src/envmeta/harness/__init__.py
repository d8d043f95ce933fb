"""Experiment harness: configs, ground truth, rate fitting, CLI, persistence."""

from .config import ExperimentConfig, config_hash
from .fitting import RateFit, RateFitError, fit_rate
from .ground_truth import GroundTruth, bias_fixed_point, estimate_sigma_sq, solve_ground_truth

__all__ = [
    "ExperimentConfig",
    "config_hash",
    "GroundTruth",
    "solve_ground_truth",
    "bias_fixed_point",
    "estimate_sigma_sq",
    "RateFit",
    "RateFitError",
    "fit_rate",
]
