"""Prior distributions: Gaussian or uniform box."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class BoxUniform:
    """Uniform prior on an axis-aligned box."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.atleast_1d(np.asarray(self.lower, dtype=np.float64)))
        object.__setattr__(self, "upper", np.atleast_1d(np.asarray(self.upper, dtype=np.float64)))
        if self.lower.shape != self.upper.shape or np.any(self.lower >= self.upper):
            raise ConfigurationError("box prior needs lower < upper per dimension")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def inside(self, theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_2d(theta)
        return np.all((theta >= self.lower) & (theta <= self.upper), axis=-1)

    def log_prob(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        squeeze = theta.ndim == 1
        out = np.where(self.inside(theta), -np.log(self.volume), -np.inf)
        return out[0] if squeeze else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def standardized(self, shift: np.ndarray, scale: np.ndarray) -> "BoxUniform":
        return BoxUniform((self.lower - shift) / scale, (self.upper - shift) / scale)


def is_uniform(prior) -> bool:
    return isinstance(prior, BoxUniform)
