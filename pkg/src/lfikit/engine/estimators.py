"""Standardization-aware estimator wrapper and factory."""

from __future__ import annotations

import numpy as np

from ..density import MAF, MDN, MoGDist, Standardizer
from ..diffcore import ParamVector
from ..errors import ConfigurationError
from .config import EstimatorConfig


def build_estimator(spec: EstimatorConfig, x_dim: int, theta_dim: int):
    if spec.kind == "mdn":
        return MDN(x_dim, theta_dim, n_components=spec.components, hidden=spec.hidden)
    if spec.kind == "maf":
        return MAF(x_dim, theta_dim, n_mades=spec.mades, hidden=spec.hidden,
                   perm_seed=spec.perm_seed)
    raise ConfigurationError(f"unknown estimator kind {spec.kind!r}")


class StandardizedEstimator:
    """Presents original-space conditioning and parameters while the
    network sees standardized inputs; densities carry the Jacobian
    correction so log-probabilities refer to original-space theta."""

    def __init__(self, arch, x_std: Standardizer, theta_std: Standardizer):
        self.arch = arch
        self.x_std = x_std
        self.theta_std = theta_std
        self._log_jac = -float(np.sum(np.log(theta_std.scale)))

    @property
    def kind(self):
        return self.arch.kind

    def log_prob(self, params: ParamVector, x, theta, root=None):
        out = self.arch.log_prob(params, self.x_std.apply(x),
                                 self.theta_std.apply(theta), root=root)
        return out + self._log_jac

    def pair_log_prob(self, params: ParamVector, x, theta, root=None):
        out = self.arch.pair_log_prob(params, self.x_std.apply(x),
                                      self.theta_std.apply(theta), root=root)
        return out + self._log_jac

    def sample(self, params: ParamVector, x, rng, size: int) -> np.ndarray:
        std = self.arch.sample(params, self.x_std.apply(np.atleast_2d(x)), rng, size)
        return self.theta_std.invert(std)

    def emit(self, params: ParamVector, x) -> MoGDist:
        if self.arch.kind != "mdn":
            raise ConfigurationError("only MDN estimators emit mixtures")
        std = self.arch.emit(params, self.x_std.apply(x))
        return std.affine(self.theta_std.shift, self.theta_std.scale)
