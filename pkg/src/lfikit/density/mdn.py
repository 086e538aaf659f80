"""Mixture-density networks: map data to Mixture-of-Gaussians parameters."""

from __future__ import annotations

import numpy as np

from .. import diffcore as dc
from ..diffcore import tape
from ..errors import ConfigurationError, NumericError
from .mog import MoGDist

_LOG_2PI = np.log(2.0 * np.pi)


class MDN:
    """Conditional density estimator q(theta | x) as a K-component MoG.

    A tanh trunk maps x to features; an affine head emits mixture logits,
    component means and unconstrained Cholesky entries. The factor diagonal
    goes through exp, so any parameter vector decodes to a valid mixture.
    """

    kind = "mdn"

    def __init__(self, x_dim: int, theta_dim: int, n_components: int = 8,
                 hidden=(50, 50)):
        if n_components < 1:
            raise ConfigurationError("n_components must be >= 1")
        self.x_dim = int(x_dim)
        self.theta_dim = int(theta_dim)
        self.n_components = int(n_components)
        self.hidden = tuple(int(h) for h in hidden)
        self.trunk = dc.MLPSpec(self.x_dim, self.hidden[:-1], self.hidden[-1],
                                prefix="trunk_")
        n = self.theta_dim
        self._n_low = n * (n - 1) // 2
        head_out = self.n_components * (1 + n + n + self._n_low)
        shapes = self.trunk.segment_shapes()
        shapes["head_W"] = (self.hidden[-1], head_out)
        shapes["head_b"] = (head_out,)
        self.segment_shapes = shapes
        self.layout, self.n_params = dc.build_layout(shapes)

    def init_params(self, rng: np.random.Generator) -> dc.ParamVector:
        return dc.ParamVector(dc.init_segments(self.segment_shapes, rng), self.layout)

    def manifest(self) -> dict:
        return {"kind": self.kind, "x_dim": self.x_dim, "theta_dim": self.theta_dim,
                "n_components": self.n_components, "hidden": list(self.hidden)}

    # -- decoding -----------------------------------------------------------

    def psi(self, params: dc.ParamVector, x, root=None):
        """Decode head outputs for a batch of x.

        Returns (log_weights (B,K), means (B,K,n), chols (B,K,n,n),
        log_det (B,K)); graph nodes when `root` is given.
        """
        x_arr = tape.value_of(x)
        if x_arr.ndim != 2 or x_arr.shape[1] != self.x_dim:
            raise ConfigurationError("x must have shape (batch, x_dim)")
        if not np.all(np.isfinite(x_arr)):
            raise NumericError("non-finite conditioning input")
        seg = (params.segment if root is None
               else (lambda name: params.segment_node(root, name)))
        feats = tape.tanh(dc.mlp_forward(self.trunk, params, x, root=root))
        out = tape.matmul(feats, seg("head_W")) + seg("head_b")
        K, n = self.n_components, self.theta_dim
        batch = x_arr.shape[0]
        logits = out[:, :K]
        means = tape.reshape(out[:, K:K + K * n], (-1, K, n))
        diag_raw = tape.reshape(out[:, K + K * n:K + 2 * K * n], (-1, K, n))
        if self._n_low:
            lower = tape.reshape(out[:, K + 2 * K * n:], (-1, K, self._n_low))
        else:
            lower = np.zeros((batch, K, 0))
        chols = tape.build_tril(tape.exp(diag_raw), lower, n)
        log_weights = logits - tape.logsumexp(logits, axis=-1, keepdims=True)
        log_det = tape.sum_(diag_raw, axis=-1)
        return log_weights, means, chols, log_det

    def emit(self, params: dc.ParamVector, x: np.ndarray) -> MoGDist:
        """Mixture emitted for a single conditioning vector."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        log_w, means, chols, _ = self.psi(params, x)
        return MoGDist(np.exp(log_w[0]), means[0], chols[0])

    # -- densities ----------------------------------------------------------

    def _component_logpdf(self, theta, means, chols, log_det):
        diff = theta - means
        z = tape.tri_solve_lower(chols, diff)
        return (-0.5 * tape.sum_(tape.square(z), axis=-1) - log_det
                - 0.5 * self.theta_dim * _LOG_2PI)

    def log_prob(self, params, x, theta, root=None):
        """log q(theta_b | x_b) for aligned batches; (B,)."""
        log_w, means, chols, log_det = self.psi(params, x, root=root)
        theta_e = tape.reshape(theta, (-1, 1, self.theta_dim))
        comp = self._component_logpdf(theta_e, means, chols, log_det)
        return tape.logsumexp(comp + log_w, axis=-1)

    def pair_log_prob(self, params, x, theta, root=None):
        """Q[i, j] = log q(theta_j | x_i); one decode per x, then M^2 evals."""
        m = tape.value_of(x).shape[0]
        K, n = self.n_components, self.theta_dim
        log_w, means, chols, log_det = self.psi(params, x, root=root)
        theta_e = tape.reshape(theta, (1, -1, 1, n))
        means_e = tape.reshape(means, (m, 1, K, n))
        chols_e = tape.reshape(chols, (m, 1, K, n, n))
        log_det_e = tape.reshape(log_det, (m, 1, K))
        comp = self._component_logpdf(theta_e, means_e, chols_e, log_det_e)
        return tape.logsumexp(comp + tape.reshape(log_w, (m, 1, K)), axis=-1)

    def sample(self, params: dc.ParamVector, x: np.ndarray,
               rng: np.random.Generator, size: int) -> np.ndarray:
        return self.emit(params, x).sample(rng, size)
