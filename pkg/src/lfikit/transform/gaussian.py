"""Gaussian and Mixture-of-Gaussians proposal-posterior algebra.

All conversions run in precision space via Cholesky factors: combining a
posterior estimate with a proposal and prior amounts to adding/subtracting
precision matrices and natural-parameter vectors, with determinants taken
as log-dets of the factors. Weight recombination happens entirely in log
space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..density.mog import MoGDist
from ..errors import ConfigurationError, NonPositiveDefinite, PrecisionNotPD
from .priors import BoxUniform, is_uniform

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class GaussianDist:
    """Multivariate normal stored as mean and lower Cholesky factor of cov."""

    mean: np.ndarray
    chol: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        self.chol = np.atleast_2d(np.asarray(self.chol, dtype=np.float64))
        n = self.mean.size
        if self.chol.shape != (n, n):
            raise ConfigurationError("Cholesky factor shape mismatch")
        if np.any(np.diag(self.chol) <= 0):
            raise ConfigurationError("covariance factor must have positive diagonal")

    @classmethod
    def from_cov(cls, mean, cov) -> "GaussianDist":
        cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as err:
            raise NonPositiveDefinite(f"covariance not positive definite: {err}") from err
        return cls(mean, chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def cov(self) -> np.ndarray:
        return self.chol @ self.chol.T

    @property
    def precision(self) -> np.ndarray:
        inv_l = np.linalg.inv(self.chol)
        return inv_l.T @ inv_l

    @property
    def log_det_cov(self) -> float:
        return 2.0 * float(np.log(np.diag(self.chol)).sum())

    def log_prob(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        squeeze = theta.ndim == 1
        pts = np.atleast_2d(theta)
        z = np.linalg.solve(self.chol, (pts - self.mean).T).T
        out = -0.5 * np.sum(z * z, axis=1) - 0.5 * self.log_det_cov - 0.5 * self.dim * _LOG_2PI
        return out[0] if squeeze else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.mean + rng.standard_normal((size, self.dim)) @ self.chol.T

    def as_mog(self) -> MoGDist:
        return MoGDist(np.array([1.0]), self.mean[None], self.chol[None])

    def standardized(self, shift, scale) -> "GaussianDist":
        scale = np.asarray(scale, dtype=np.float64)
        return GaussianDist((self.mean - shift) / scale, self.chol / scale[:, None])


def is_gaussian(prior) -> bool:
    return isinstance(prior, GaussianDist)


def _prior_natural(prior, dim: int):
    """(precision, precision @ mean) of the prior; zeros for a uniform box."""
    if is_uniform(prior):
        return np.zeros((dim, dim)), np.zeros(dim)
    if is_gaussian(prior):
        p = prior.precision
        return p, p @ prior.mean
    raise ConfigurationError(f"unsupported prior type {type(prior)!r}")


def _chol_or_none(mat: np.ndarray):
    try:
        return np.linalg.cholesky(0.5 * (mat + np.swapaxes(mat, -1, -2)))
    except np.linalg.LinAlgError:
        return None


def gaussian_proposal_posterior(post: GaussianDist, prior,
                                proposal: GaussianDist) -> GaussianDist:
    """Transform a posterior estimate into the matching proposal posterior.

    Precision combines as post + proposal - prior; the natural mean the
    same way. Cannot fail while the proposal is narrower than the prior in
    precision order; otherwise raises PrecisionNotPD.
    """
    n = post.dim
    p_prior, eta_prior = _prior_natural(prior, n)
    p_new = post.precision + proposal.precision - p_prior
    chol_p = _chol_or_none(p_new)
    if chol_p is None:
        raise PrecisionNotPD("combined precision is not positive definite")
    eta_new = post.precision @ post.mean + proposal.precision @ proposal.mean - eta_prior
    mean = np.linalg.solve(p_new, eta_new)
    inv_lp = np.linalg.inv(chol_p)
    cov = inv_lp.T @ inv_lp
    return GaussianDist.from_cov(mean, 0.5 * (cov + cov.T))


def _as_mog(dist) -> MoGDist:
    if isinstance(dist, GaussianDist):
        return dist.as_mog()
    if isinstance(dist, MoGDist):
        return dist
    raise ConfigurationError(f"expected Gaussian or MoG, got {type(dist)!r}")


def _component_naturals(mog: MoGDist):
    """Per-component (precision, natural mean, logdet cov, mean quad form)."""
    inv_l = np.linalg.inv(mog.chols)
    prec = np.swapaxes(inv_l, -1, -2) @ inv_l
    eta = np.einsum("kij,kj->ki", prec, mog.means)
    log_det = 2.0 * np.log(np.diagonal(mog.chols, axis1=-2, axis2=-1)).sum(-1)
    quad = np.einsum("ki,ki->k", mog.means, eta)
    return prec, eta, log_det, quad


def mog_proposal_posterior(post: MoGDist, prior, proposal) -> MoGDist:
    """Product-divide a K-component posterior MoG with an L-component
    proposal MoG and the prior, yielding the L*K-component proposal
    posterior with exactly recombined weights (log-space normalized).
    """
    proposal = _as_mog(proposal)
    n = post.dim
    if proposal.dim != n:
        raise ConfigurationError("proposal dimension mismatch")
    p_prior, eta_prior = _prior_natural(prior, n)
    prec_q, eta_q, logdet_q, quad_q = _component_naturals(post)
    prec_p, eta_p, logdet_p, quad_p = _component_naturals(proposal)

    prec_star = prec_q[:, None] + prec_p[None, :] - p_prior
    chol_star = _chol_or_none(prec_star)
    if chol_star is None:
        for i in range(post.n_components):
            for k in range(proposal.n_components):
                if _chol_or_none(prec_star[i, k]) is None:
                    raise PrecisionNotPD(
                        f"combined precision not PD for components ({i}, {k})",
                        component=(i, k))
    eta_star = eta_q[:, None] + eta_p[None, :] - eta_prior
    mean_star = np.linalg.solve(prec_star, eta_star[..., None])[..., 0]
    logdet_cov_star = -2.0 * np.log(
        np.diagonal(chol_star, axis1=-2, axis2=-1)).sum(-1)
    quad_star = np.einsum("...i,...i->...", mean_star, eta_star)

    with np.errstate(divide="ignore"):
        log_zeta = (np.log(post.weights)[:, None] + np.log(proposal.weights)[None, :]
                    + 0.5 * (logdet_cov_star - logdet_q[:, None] - logdet_p[None, :])
                    - 0.5 * (quad_q[:, None] + quad_p[None, :] - quad_star))
    flat = log_zeta.reshape(-1)
    flat = flat - (np.log(np.exp(flat - flat.max()).sum()) + flat.max())
    inv_cs = np.linalg.inv(chol_star)
    cov_star = np.swapaxes(inv_cs, -1, -2) @ inv_cs
    cov_star = 0.5 * (cov_star + np.swapaxes(cov_star, -1, -2))
    chols = np.linalg.cholesky(cov_star.reshape(-1, n, n))
    return MoGDist(np.exp(flat), mean_star.reshape(-1, n), chols)


def snpe_a_correct(prop_post: MoGDist, proposal: GaussianDist, prior) -> MoGDist:
    """Post-hoc inversion of the proposal-posterior transform, per component.

    Recovers covariance via precision - proposal precision + prior
    precision; weights are re-derived by running the product-divide weight
    formula in reverse. A non-PD recovered covariance raises
    NonPositiveDefinite naming the component; it is never repaired.
    """
    n = prop_post.dim
    p_prior, eta_prior = _prior_natural(prior, n)
    prec_star, eta_star, logdet_star, quad_star = _component_naturals(prop_post)
    prec_prop = proposal.precision
    eta_prop = prec_prop @ proposal.mean
    quad_prop = float(proposal.mean @ eta_prop)
    logdet_prop = proposal.log_det_cov

    prec = prec_star - prec_prop + p_prior
    chols_prec = []
    for i in range(prop_post.n_components):
        c = _chol_or_none(prec[i])
        if c is None:
            raise NonPositiveDefinite(
                f"recovered covariance not positive definite for component {i}",
                component=i)
        chols_prec.append(c)
    chols_prec = np.stack(chols_prec)
    eta = eta_star - eta_prop + eta_prior
    means = np.linalg.solve(prec, eta[..., None])[..., 0]
    logdet_cov = -2.0 * np.log(np.diagonal(chols_prec, axis1=-2, axis2=-1)).sum(-1)
    quad = np.einsum("ki,ki->k", means, eta)

    # forward weight factor: zeta_i = alpha_i * c_i / sum_j alpha_j c_j
    with np.errstate(divide="ignore"):
        log_c = (0.5 * (logdet_star - logdet_cov - logdet_prop)
                 - 0.5 * (quad + quad_prop - quad_star))
        log_alpha = np.log(prop_post.weights) - log_c
    log_alpha = log_alpha - (np.log(np.exp(log_alpha - log_alpha.max()).sum())
                             + log_alpha.max())
    inv_cp = np.linalg.inv(chols_prec)
    covs = np.swapaxes(inv_cp, -1, -2) @ inv_cp
    covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))
    return MoGDist(np.exp(log_alpha), means, np.linalg.cholesky(covs))


def snpe_b_weight(theta: np.ndarray, prior, proposal_density) -> float:
    """Importance weight prior(theta) / proposal(theta)."""
    dens = float(proposal_density(theta))
    if dens <= 0.0:
        raise ConfigurationError("proposal density must be positive at theta")
    return float(np.exp(prior.log_prob(theta))) / dens
