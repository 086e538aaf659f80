"""Per-dimension affine standardization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class Standardizer:
    shift: np.ndarray
    scale: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        return (np.asarray(v, dtype=np.float64) - self.shift) / self.scale

    def invert(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=np.float64) * self.scale + self.shift

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))


def standardize_fit(data: np.ndarray) -> Standardizer:
    """Fit per-dimension zero-mean unit-variance transform.

    Zero-variance dimensions get scale 1 with a warning.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.shape[0] < 2:
        raise ConfigurationError("standardize_fit needs at least 2 rows")
    shift = data.mean(axis=0)
    scale = data.std(axis=0)
    dead = scale == 0.0
    if np.any(dead):
        warnings.warn(f"zero-variance dimensions {np.flatnonzero(dead).tolist()}; "
                      "scale clamped to 1", RuntimeWarning, stacklevel=2)
        scale = np.where(dead, 1.0, scale)
    return Standardizer(shift, scale)
