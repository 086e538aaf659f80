"""Simulator interface and registry."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


class Simulator:
    """A stochastic forward model with its prior and reference data.

    Subclasses set name, theta_dim, x_dim, prior, theta_star and implement
    simulate(theta, rng). x_o defaults to one pinned-seed draw at
    theta_star. log_likelihood returns None unless the model is tractable.
    """

    name: str = ""
    theta_dim: int = 0
    x_dim: int = 0
    observation_seed: int = 20190510

    def __init__(self):
        self._x_o = None

    def simulate(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @property
    def theta_star(self) -> np.ndarray | None:
        return None

    @property
    def x_o(self) -> np.ndarray:
        if self._x_o is None:
            if self.theta_star is None:
                raise ConfigurationError(f"{self.name} has no default observation")
            rng = np.random.default_rng(self.observation_seed)
            self._x_o = np.asarray(self.simulate(self.theta_star, rng), dtype=np.float64)
        return self._x_o

    def log_likelihood(self, theta: np.ndarray, x: np.ndarray):
        return None

    @property
    def has_likelihood(self) -> bool:
        return type(self).log_likelihood is not Simulator.log_likelihood

    def simulate_batch(self, thetas: np.ndarray, seeds) -> np.ndarray:
        """One independent rng per row, so execution order never matters."""
        thetas = np.atleast_2d(thetas)
        out = np.empty((thetas.shape[0], self.x_dim))
        for i, (theta, seed) in enumerate(zip(thetas, seeds)):
            out[i] = self.simulate(theta, np.random.default_rng(seed))
        return out

    def manifest(self) -> dict:
        return {"name": self.name, "theta_dim": self.theta_dim, "x_dim": self.x_dim}


_REGISTRY: dict = {}


def register(name: str):
    def deco(factory):
        _REGISTRY[name] = factory
        return factory
    return deco


def get_simulator(name: str, **options) -> Simulator:
    if name not in _REGISTRY:
        raise ConfigurationError(
            f"unknown simulator '{name}'; available: {', '.join(sorted(_REGISTRY))}")
    return _REGISTRY[name](**options)


def available_simulators():
    return sorted(_REGISTRY)
