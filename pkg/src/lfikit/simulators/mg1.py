"""Single-server queue with uniform service times and Poisson arrivals."""

from __future__ import annotations

import numpy as np

from ..transform.priors import BoxUniform
from .base import Simulator, register

QUANTILE_LEVELS = np.array([0.1, 0.3, 0.5, 0.7, 0.9])


@register("mg1")
class MG1Queue(Simulator):
    """Inter-departure time quantiles of a 50-customer M/G/1 queue.

    Service times are U(t1, t1 + t2); inter-arrival times Exp(t3).
    """

    name = "mg1"
    theta_dim = 3
    x_dim = 5
    n_customers = 50

    def __init__(self):
        super().__init__()
        self.prior = BoxUniform(np.zeros(3), np.array([10.0, 10.0, 1.0 / 3.0]))

    @property
    def theta_star(self) -> np.ndarray:
        return np.array([1.0, 4.0, 0.2])

    def simulate(self, theta, rng):
        t1, t2, t3 = np.asarray(theta, dtype=np.float64)
        n = self.n_customers
        service = rng.uniform(t1, t1 + t2, size=n)
        rate = max(t3, 1e-12)
        arrivals = np.cumsum(rng.exponential(1.0 / rate, size=n))
        departures = np.empty(n)
        prev = 0.0
        for j in range(n):
            prev = service[j] + max(arrivals[j], prev)
            departures[j] = prev
        inter_dep = np.diff(np.concatenate([[0.0], departures]))
        return np.quantile(inter_dep, QUANTILE_LEVELS)
