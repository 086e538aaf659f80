"""Bernoulli spiking GLM with sufficient-statistic observations."""

from __future__ import annotations

import numpy as np

from ..transform.gaussian import GaussianDist
from .base import Simulator, register


@register("glm")
class BernoulliGLM(Simulator):
    """A bias plus a length-9 input filter drives spike probabilities over
    100 bins of frozen white noise; x holds the 10 sufficient statistics
    (spike count and per-lag spike-triggered input sums)."""

    name = "glm"
    theta_dim = 10
    x_dim = 10
    n_bins = 100
    filter_len = 9

    def __init__(self, input_seed: int = 20190520, prior_var: float = 2.0):
        super().__init__()
        self.input_seed = int(input_seed)
        noise = np.random.default_rng(self.input_seed).standard_normal(self.n_bins)
        self.input_trace = noise
        design = np.ones((self.n_bins, self.theta_dim))
        for lag in range(self.filter_len):
            shifted = np.zeros(self.n_bins)
            shifted[lag:] = noise[:self.n_bins - lag]
            design[:, 1 + lag] = shifted
        self.design = design
        self.prior = GaussianDist(np.zeros(10),
                                  np.sqrt(prior_var) * np.eye(10))

    @property
    def theta_star(self) -> np.ndarray:
        return np.random.default_rng(self.input_seed + 1).normal(0.0, 1.0, 10)

    def spike_probabilities(self, theta: np.ndarray) -> np.ndarray:
        drive = self.design @ np.asarray(theta, dtype=np.float64)
        return 1.0 / (1.0 + np.exp(-drive))

    def statistics_from_spikes(self, spikes: np.ndarray) -> np.ndarray:
        return self.design.T @ np.asarray(spikes, dtype=np.float64)

    def simulate(self, theta, rng):
        spikes = rng.random(self.n_bins) < self.spike_probabilities(theta)
        return self.statistics_from_spikes(spikes)

    def log_likelihood(self, theta, x):
        """Exact in theta up to an additive constant depending only on x:
        the statistics are sufficient, so theta'x - sum(softplus(drive))
        is the full data log likelihood with the spike-pattern
        multiplicity dropped."""
        theta = np.asarray(theta, dtype=np.float64)
        drive = self.design @ theta
        return float(theta @ np.asarray(x, dtype=np.float64)
                     - np.sum(np.logaddexp(0.0, drive)))
