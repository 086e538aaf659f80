"""Rejection-based handling of truncated (box-prior) posteriors."""

from __future__ import annotations

import numpy as np

from ..errors import LeakageTooHigh
from .priors import is_uniform


def truncated_posterior_sample(sample_fn, prior, rng: np.random.Generator,
                               n_wanted: int, max_draws: int | None = None):
    """Draw n_wanted samples inside the prior support by rejection.

    sample_fn(rng, k) draws k proposals from the estimator. Returns
    (samples, acceptance_rate); the rate doubles as the estimate of the
    estimator's mass inside the support (the leakage normalizer). Raises
    LeakageTooHigh with partial results if max_draws is exhausted.
    """
    if not is_uniform(prior):
        return np.asarray(sample_fn(rng, n_wanted)), 1.0
    if max_draws is None:
        max_draws = 200 * n_wanted
    kept = []
    n_kept = 0
    drawn = 0
    while n_kept < n_wanted and drawn < max_draws:
        batch = int(min(max(n_wanted, 4096), max_draws - drawn))
        s = np.asarray(sample_fn(rng, batch))
        drawn += batch
        good = s[prior.inside(s)]
        kept.append(good)
        n_kept += good.shape[0]
    samples = np.concatenate(kept, axis=0) if kept else np.empty((0, prior.dim))
    rate = n_kept / drawn if drawn else 0.0
    if n_kept < n_wanted:
        raise LeakageTooHigh(
            f"acceptance rate {rate:.4g} too low to draw {n_wanted} samples "
            f"within {max_draws} proposals", samples=samples, acceptance_rate=rate)
    return samples[:n_wanted], rate


def support_mass(sample_fn, prior, rng: np.random.Generator, n_draws: int = 100_000):
    """Monte Carlo estimate of the estimator's probability mass inside the
    prior support (1.0 for unbounded priors)."""
    if not is_uniform(prior):
        return 1.0
    s = np.asarray(sample_fn(rng, n_draws))
    return float(np.mean(prior.inside(s)))
