"""Conjugate linear-Gaussian toy: the universal cross-algorithm oracle."""

from __future__ import annotations

import numpy as np

from ..transform.gaussian import GaussianDist
from .base import Simulator, register

_LOG_2PI = np.log(2.0 * np.pi)


@register("linear_gaussian")
class LinearGaussian(Simulator):
    """x = theta + noise with Gaussian prior; posterior in closed form."""

    name = "linear_gaussian"
    theta_dim = 1
    x_dim = 1

    def __init__(self, prior_mean: float = 0.0, prior_var: float = 1.0,
                 noise_var: float = 1.0, x_o: float = 2.0):
        super().__init__()
        self.prior = GaussianDist(np.array([prior_mean]),
                                  np.array([[np.sqrt(prior_var)]]))
        self.noise_var = float(noise_var)
        self._x_o = np.array([float(x_o)])

    @property
    def theta_star(self) -> np.ndarray:
        return np.array([1.0])

    def simulate(self, theta, rng):
        theta = np.atleast_1d(theta)
        return theta + rng.normal(0.0, np.sqrt(self.noise_var), size=1)

    def log_likelihood(self, theta, x):
        theta, x = np.atleast_1d(theta), np.atleast_1d(x)
        return float(-0.5 * (x[0] - theta[0]) ** 2 / self.noise_var
                     - 0.5 * np.log(self.noise_var) - 0.5 * _LOG_2PI)

    def analytic_posterior(self, x_o=None) -> GaussianDist:
        x_o = self._x_o if x_o is None else np.atleast_1d(x_o)
        prior_var = self.prior.cov[0, 0]
        prec = 1.0 / prior_var + 1.0 / self.noise_var
        var = 1.0 / prec
        mean = var * (self.prior.mean[0] / prior_var + x_o[0] / self.noise_var)
        return GaussianDist(np.array([mean]), np.array([[np.sqrt(var)]]))
