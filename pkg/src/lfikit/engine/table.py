"""Append-only store of simulated (theta, x) pairs across rounds."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


class SimTable:
    def __init__(self, theta_dim: int, x_dim: int):
        self.theta_dim = int(theta_dim)
        self.x_dim = int(x_dim)
        self.theta = np.empty((0, self.theta_dim))
        self.x = np.empty((0, self.x_dim))
        self.round_index = np.empty(0, dtype=np.int64)
        self.proposal_id = np.empty(0, dtype=np.int64)

    def append(self, thetas: np.ndarray, xs: np.ndarray, round_index: int,
               proposal_id: int) -> None:
        thetas = np.atleast_2d(thetas)
        xs = np.atleast_2d(xs)
        if thetas.shape[0] != xs.shape[0]:
            raise ConfigurationError("theta and x row counts differ")
        if thetas.shape[1] != self.theta_dim or xs.shape[1] != self.x_dim:
            raise ConfigurationError("column counts do not match table dims")
        if self.round_index.size and round_index != self.round_index[-1] + 1:
            raise ConfigurationError("rounds must be appended contiguously")
        if not self.round_index.size and round_index != 1:
            raise ConfigurationError("rounds start at 1")
        n = thetas.shape[0]
        self.theta = np.concatenate([self.theta, thetas])
        self.x = np.concatenate([self.x, xs])
        self.round_index = np.concatenate(
            [self.round_index, np.full(n, round_index, dtype=np.int64)])
        self.proposal_id = np.concatenate(
            [self.proposal_id, np.full(n, proposal_id, dtype=np.int64)])

    @property
    def n_rows(self) -> int:
        return self.theta.shape[0]

    @property
    def n_rounds(self) -> int:
        return int(self.round_index.max()) if self.round_index.size else 0
