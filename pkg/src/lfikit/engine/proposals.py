"""Proposal adapters used by the sequential runners."""

from __future__ import annotations

import numpy as np

from ..transform import truncated_posterior_sample


class EstimatorProposal:
    """Sample next-round parameters from a trained estimator at x_o,
    rejecting leaked mass when the prior support is bounded."""

    def __init__(self, wrapper, params, x_o: np.ndarray, prior, label: str):
        self.wrapper = wrapper
        self.params = params
        self.x_o = np.atleast_2d(x_o)
        self.prior = prior
        self.label = label
        self.last_acceptance = None

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        samples, rate = truncated_posterior_sample(
            lambda r, k: self.wrapper.sample(self.params, self.x_o, r, k),
            self.prior, rng, n)
        self.last_acceptance = rate
        return samples


class DistributionProposal:
    """Analytic proposal (Gaussian or MoG) with support rejection."""

    def __init__(self, dist, prior, label: str):
        self.dist = dist
        self.prior = prior
        self.label = label
        self.last_acceptance = None

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        samples, rate = truncated_posterior_sample(
            lambda r, k: self.dist.sample(r, k), self.prior, rng, n)
        self.last_acceptance = rate
        return samples


class PriorProposal:
    label = "prior"

    def __init__(self, prior):
        self.prior = prior
        self.last_acceptance = 1.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.prior.sample(rng, n)
