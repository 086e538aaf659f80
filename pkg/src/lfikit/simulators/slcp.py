"""Simple-likelihood complex-posterior benchmark, with an optional
uninformative-dimension variant."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError
from ..transform.priors import BoxUniform
from .base import Simulator, register

_LOG_2PI = np.log(2.0 * np.pi)

THETA_STAR = np.array([0.7, -2.9, -1.0, -0.9, 0.6])


def _cov_factor(theta: np.ndarray) -> np.ndarray:
    """Lower factor L with L L^T equal to the theta-dependent covariance."""
    t5 = np.tanh(theta[4])
    return np.array([[theta[2], 0.0],
                     [theta[3] * t5, theta[3] * np.sqrt(max(1.0 - t5 * t5, 0.0))]])


def _cov(theta: np.ndarray) -> np.ndarray:
    t5 = np.tanh(theta[4])
    off = theta[2] * theta[3] * t5
    return np.array([[theta[2] ** 2, off], [off, theta[3] ** 2]])


@register("slcp")
class SLCP(Simulator):
    """Four iid bivariate Gaussian draws whose mean and covariance depend
    nonlinearly on a 5-vector; sign symmetries give a four-mode posterior."""

    name = "slcp"
    theta_dim = 5
    x_dim = 8
    n_draws = 4

    def __init__(self):
        super().__init__()
        self.prior = BoxUniform(-3.0 * np.ones(5), 3.0 * np.ones(5))

    @property
    def theta_star(self) -> np.ndarray:
        return THETA_STAR.copy()

    def simulate(self, theta, rng):
        theta = np.asarray(theta, dtype=np.float64)
        mean = theta[:2]
        factor = _cov_factor(theta)
        eps = rng.standard_normal((self.n_draws, 2))
        return (mean + eps @ factor.T).ravel()

    def log_likelihood(self, theta, x):
        theta = np.asarray(theta, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64).reshape(self.n_draws, 2)
        if theta[2] == 0.0 or theta[3] == 0.0:
            raise NumericError("degenerate covariance: scale entries are zero")
        cov = _cov(theta)
        diff = x - theta[:2]
        sol = np.linalg.solve(cov, diff.T).T
        _, logdet = np.linalg.slogdet(cov)
        return float(-0.5 * np.sum(diff * sol) - 0.5 * self.n_draws * (logdet + 2 * _LOG_2PI))

    def mode_points(self) -> np.ndarray:
        """The four sign-symmetric copies of theta_star."""
        out = []
        for s3 in (1.0, -1.0):
            for s4 in (1.0, -1.0):
                t = THETA_STAR.copy()
                t[2] *= s3
                t[3] *= s4
                t[4] *= s3 * s4
                out.append(t)
        return np.array(out)

    def symmetry_group(self):
        """Sign maps that leave the likelihood invariant for every x."""
        def g1(t):
            out = t.copy()
            out[..., 2] *= -1
            out[..., 3] *= -1
            return out

        def g2(t):
            out = t.copy()
            out[..., 2] *= -1
            out[..., 4] *= -1
            return out

        return [lambda t: t.copy(), g1, g2, lambda t: g1(g2(t))]


@register("slcp_distractors")
class SLCPDistractors(Simulator):
    """SLCP with extra dimensions drawn from a frozen heavy-tailed mixture,
    independent of the parameters, and a frozen output permutation: the
    posterior is unchanged but inference sees a wider x."""

    name = "slcp_distractors"
    theta_dim = 5

    def __init__(self, n_distractors: int = 32, mixture_seed: int = 42):
        super().__init__()
        self.base = SLCP()
        self.prior = self.base.prior
        self.n_distractors = int(n_distractors)
        self.mixture_seed = int(mixture_seed)
        self.x_dim = 8 + self.n_distractors
        self.n_components = 20
        self.df = 2.0
        rng = np.random.default_rng(self.mixture_seed)
        m = self.n_distractors
        self.mix_means = rng.uniform(-5.0, 5.0, size=(self.n_components, m))
        self.mix_chols = np.zeros((self.n_components, m, m))
        for i in range(self.n_components):
            a = rng.standard_normal((m, m))
            self.mix_chols[i] = np.linalg.cholesky(a @ a.T + np.eye(m))
        self.permutation = rng.permutation(self.x_dim)

    @property
    def theta_star(self) -> np.ndarray:
        return THETA_STAR.copy()

    def manifest(self) -> dict:
        out = super().manifest()
        out.update({"n_distractors": self.n_distractors, "mixture_seed": self.mixture_seed})
        return out

    def sample_distractors(self, rng: np.random.Generator) -> np.ndarray:
        k = rng.integers(0, self.n_components)
        z = self.mix_chols[k] @ rng.standard_normal(self.n_distractors)
        w = rng.chisquare(self.df) / self.df
        return self.mix_means[k] + z / np.sqrt(w)

    def simulate(self, theta, rng):
        informative = self.base.simulate(theta, rng)
        noise = self.sample_distractors(rng)
        return np.concatenate([informative, noise])[self.permutation]

    def informative_part(self, x: np.ndarray) -> np.ndarray:
        """Undo the output permutation and keep the 8 informative dims."""
        inverse = np.argsort(self.permutation)
        return np.asarray(x)[..., inverse][..., :8]

    def log_likelihood(self, theta, x):
        """Likelihood of the informative block; the distractor factor is
        theta-free and leaves the posterior unchanged."""
        return self.base.log_likelihood(theta, self.informative_part(x))

    def marginal_t_cdf(self, dim: int, t: np.ndarray) -> np.ndarray:
        """Analytic CDF of one distractor dimension (mixture of t laws)."""
        from scipy.stats import t as student_t

        t = np.asarray(t, dtype=np.float64)
        covs = self.mix_chols @ np.swapaxes(self.mix_chols, -1, -2)
        scales = np.sqrt(covs[:, dim, dim])
        vals = [student_t.cdf((t - self.mix_means[k, dim]) / scales[k], self.df)
                for k in range(self.n_components)]
        return np.mean(vals, axis=0)
