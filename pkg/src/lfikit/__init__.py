"""lfikit: simulation-based Bayesian inference with sequential neural posterior estimation."""

__version__ = "0.1.0"
