"""Metrics and ground-truth reference posteriors."""

from .mmd import median_heuristic_bandwidth, mmd
from .references import (
    REFERENCE_SEED,
    REFERENCE_SIZE,
    DensityGrid,
    linear_gaussian_reference,
    slcp_reference_posterior,
    two_moons_ball_mass_closed_form,
    two_moons_ball_mass_quadrature,
    two_moons_reference_posterior,
)
from .scores import median_distance, neg_log_prob_true_params

__all__ = [
    "REFERENCE_SEED",
    "REFERENCE_SIZE",
    "DensityGrid",
    "linear_gaussian_reference",
    "median_distance",
    "median_heuristic_bandwidth",
    "mmd",
    "neg_log_prob_true_params",
    "slcp_reference_posterior",
    "two_moons_ball_mass_closed_form",
    "two_moons_ball_mass_quadrature",
    "two_moons_reference_posterior",
]
