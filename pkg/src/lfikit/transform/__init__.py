"""Conversions between true-posterior and proposal-posterior estimates."""

from .atomic import (
    AtomSet,
    atomic_log_prob,
    atomic_loss_from_matrix,
    atomic_loss_minibatch,
    prior_log_weights,
)
from .gaussian import (
    GaussianDist,
    gaussian_proposal_posterior,
    is_gaussian,
    mog_proposal_posterior,
    snpe_a_correct,
    snpe_b_weight,
)
from .graph import transformed_mog_log_prob
from .priors import BoxUniform, is_uniform
from .truncate import support_mass, truncated_posterior_sample

__all__ = [
    "AtomSet",
    "BoxUniform",
    "GaussianDist",
    "atomic_log_prob",
    "atomic_loss_from_matrix",
    "atomic_loss_minibatch",
    "gaussian_proposal_posterior",
    "is_gaussian",
    "is_uniform",
    "mog_proposal_posterior",
    "prior_log_weights",
    "snpe_a_correct",
    "snpe_b_weight",
    "support_mass",
    "transformed_mog_log_prob",
    "truncated_posterior_sample",
]
