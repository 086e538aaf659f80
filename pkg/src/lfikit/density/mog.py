"""Finite Gaussian mixtures with Cholesky-factored covariances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, NumericError

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class MoGDist:
    """Mixture of Gaussians: weights (K,), means (K, n), chols (K, n, n).

    chols[k] is lower-triangular with strictly positive diagonal and
    cov_k = chols[k] @ chols[k].T.
    """

    weights: np.ndarray
    means: np.ndarray
    chols: np.ndarray

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        self.chols = np.asarray(self.chols, dtype=np.float64)
        if self.chols.ndim == 2:
            self.chols = self.chols[None]
        k, n = self.means.shape
        if self.weights.shape != (k,) or self.chols.shape != (k, n, n):
            raise ConfigurationError("inconsistent mixture shapes")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.means))
                and np.all(np.isfinite(self.chols))):
            raise NumericError("mixture parameters must be finite")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigurationError("mixture weights must be a simplex")
        diag = np.diagonal(self.chols, axis1=-2, axis2=-1)
        if np.any(diag <= 0):
            raise ConfigurationError("Cholesky factors need strictly positive diagonals")

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def covs(self) -> np.ndarray:
        return self.chols @ np.swapaxes(self.chols, -1, -2)

    def log_prob(self, theta: np.ndarray) -> np.ndarray:
        """Log density at theta, shape (..., dim) -> (...)."""
        theta = np.asarray(theta, dtype=np.float64)
        squeeze = theta.ndim == 1
        pts = np.atleast_2d(theta)
        if pts.shape[-1] != self.dim:
            raise ConfigurationError(
                f"point dim {pts.shape[-1]} != mixture dim {self.dim}")
        diff = pts[:, None, :] - self.means[None, :, :]
        z = np.linalg.solve(self.chols[None], diff[..., None])[..., 0]
        log_det = np.log(np.diagonal(self.chols, axis1=-2, axis2=-1)).sum(-1)
        comp = (-0.5 * np.sum(z * z, axis=-1) - log_det[None, :]
                - 0.5 * self.dim * _LOG_2PI)
        with np.errstate(divide="ignore"):
            stacked = comp + np.log(self.weights)[None, :]
        hi = stacked.max(axis=-1, keepdims=True)
        out = np.log(np.exp(stacked - hi).sum(-1)) + hi[..., 0]
        return out[0] if squeeze else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Ancestral sampling: categorical component then Gaussian draw."""
        ks = rng.choice(self.n_components, size=size, p=self.weights)
        eps = rng.standard_normal((size, self.dim))
        return self.means[ks] + np.einsum("kij,kj->ki", self.chols[ks], eps)

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def cov(self) -> np.ndarray:
        m = self.mean()
        second = np.einsum("k,kij->ij", self.weights,
                           self.covs + self.means[:, :, None] * self.means[:, None, :])
        return second - np.outer(m, m)

    def marginal_cdf(self, dim: int, t) -> np.ndarray:
        """Analytic CDF of one coordinate's marginal."""
        from scipy.stats import norm

        t = np.asarray(t, dtype=np.float64)
        sd = np.sqrt(self.covs[:, dim, dim])
        return np.sum(self.weights[None, :]
                      * norm.cdf((t[..., None] - self.means[None, :, dim]) / sd[None, :]),
                      axis=-1)

    def affine(self, shift: np.ndarray, scale: np.ndarray) -> "MoGDist":
        """Distribution of shift + scale * theta (per-dimension scale)."""
        shift = np.asarray(shift, dtype=np.float64)
        scale = np.asarray(scale, dtype=np.float64)
        return MoGDist(self.weights.copy(),
                       shift[None, :] + scale[None, :] * self.means,
                       scale[None, :, None] * self.chols)

    def moment_match_gaussian(self):
        """Single-Gaussian collapse with matched mean and covariance."""
        from ..transform.gaussian import GaussianDist

        return GaussianDist(self.mean(), np.linalg.cholesky(self.cov()))


def single_gaussian_mog(mean, chol) -> MoGDist:
    return MoGDist(np.array([1.0]), np.atleast_2d(mean), np.asarray(chol)[None])
