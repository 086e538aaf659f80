"""Posterior quality scores beyond sample-set distances."""

from __future__ import annotations

import warnings

import numpy as np

from ..engine.seeds import seed_sequence
from ..transform import support_mass
from ..transform.priors import is_uniform


def neg_log_prob_true_params(log_prob_fn, sample_fn, prior, theta_star: np.ndarray,
                             rng: np.random.Generator, n_mass_draws: int = 100_000) -> float:
    """-log q(theta_star | x_o) with truncation renormalization.

    For bounded priors the estimator's density is renormalized by its
    sampled mass inside the support (the rejection rate estimate); for
    unbounded priors the density is already normalized. Returns +inf when
    theta_star falls outside the support.
    """
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=np.float64))
    if is_uniform(prior) and not prior.inside(theta_star)[0]:
        warnings.warn("theta_star outside prior support; score is +inf",
                      RuntimeWarning)
        return np.inf
    log_q = float(log_prob_fn(theta_star))
    mass = support_mass(sample_fn, prior, rng, n_mass_draws)
    if mass <= 0.0:
        return np.inf
    return -(log_q - np.log(mass))


def median_distance(samples: np.ndarray, simulate_fn, x_o: np.ndarray,
                    master_seed: int, scale: np.ndarray | None = None):
    """Median Euclidean distance between x_o and one simulation per sample.

    simulate_fn(theta, rng) -> x. Failed simulations are skipped; returns
    (median, n_failures).
    """
    samples = np.atleast_2d(samples)
    x_o = np.asarray(x_o, dtype=np.float64)
    scale = np.ones_like(x_o) if scale is None else np.asarray(scale, dtype=np.float64)
    dists = []
    failures = 0
    for j, theta in enumerate(samples):
        rng = np.random.default_rng(seed_sequence(master_seed, "eval", 7, j))
        try:
            x = simulate_fn(theta, rng)
        except Exception:
            failures += 1
            continue
        if not np.all(np.isfinite(x)):
            failures += 1
            continue
        dists.append(np.linalg.norm((x - x_o) / scale))
    if not dists:
        return np.inf, failures
    return float(np.median(dists)), failures
