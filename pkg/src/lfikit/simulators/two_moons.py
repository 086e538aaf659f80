"""Crescent-shaped bimodal-posterior toy simulator."""

from __future__ import annotations

import numpy as np

from ..transform.priors import BoxUniform
from .base import Simulator, register

_SQRT2 = np.sqrt(2.0)
_R_MEAN = 0.1
_R_STD = 0.01


def crescent_offset(theta: np.ndarray) -> np.ndarray:
    """Posterior-shaping shift: the absolute value makes it two-moons."""
    theta = np.atleast_2d(theta)
    return np.column_stack([-np.abs(theta[:, 0] + theta[:, 1]) / _SQRT2,
                            (-theta[:, 0] + theta[:, 1]) / _SQRT2])


def forward_from_latents(theta: np.ndarray, a, r) -> np.ndarray:
    """Deterministic map given the latent angle and radius draws; (B, 2)."""
    a, r = np.atleast_1d(a), np.atleast_1d(r)
    p = np.stack([r * np.cos(a) + 0.25, r * np.sin(a)], axis=-1)
    return p + crescent_offset(theta)


@register("two_moons")
class TwoMoons(Simulator):
    name = "two_moons"
    theta_dim = 2
    x_dim = 2

    def __init__(self):
        super().__init__()
        self.prior = BoxUniform(-np.ones(2), np.ones(2))
        self._x_o = np.zeros(2)

    @property
    def theta_star(self) -> np.ndarray:
        # one of the two posterior-mode centers for x_o = (0, 0)
        s = (_R_MEAN + 0.25) / _SQRT2
        return np.array([s, s])

    def simulate(self, theta, rng):
        a = rng.uniform(-np.pi / 2, np.pi / 2)
        r = rng.normal(_R_MEAN, _R_STD)
        return forward_from_latents(theta, a, r)[0]

    @staticmethod
    def _shifted_log_density(u: np.ndarray) -> np.ndarray:
        """Density of p = (r cos a + 0.25, r sin a) at points u: the latent
        pair integrates out exactly (polar change of variables, Jacobian r),
        with both radius branches kept."""
        c = u - np.array([0.25, 0.0])
        radius = np.hypot(c[:, 0], c[:, 1])
        signed = np.where(c[:, 0] >= 0.0, radius, -radius)
        with np.errstate(divide="ignore"):
            out = (-np.log(np.pi) - np.log(radius)
                   - 0.5 * ((signed - _R_MEAN) / _R_STD) ** 2
                   - 0.5 * np.log(2.0 * np.pi) - np.log(_R_STD))
        return np.where(radius > 0.0, out, np.inf)

    def log_likelihood(self, theta, x):
        """Exact log density of one observation, vectorized over theta."""
        single = np.asarray(theta).ndim == 1
        theta = np.atleast_2d(np.asarray(theta, dtype=np.float64))
        x = np.asarray(x, dtype=np.float64)
        out = self._shifted_log_density(x.reshape(1, 2) - crescent_offset(theta))
        return float(out[0]) if single else out

    def log_likelihood_over_x(self, theta: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Exact log density at many observations for one theta."""
        offset = crescent_offset(np.asarray(theta, dtype=np.float64))[0]
        return self._shifted_log_density(np.atleast_2d(xs) - offset)
