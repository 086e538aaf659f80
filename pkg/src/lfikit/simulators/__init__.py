"""Benchmark simulators, their priors and reference data."""

from . import glm, linear_gaussian, lotka_volterra, mg1, slcp, two_moons  # noqa: F401
from .base import Simulator, available_simulators, get_simulator
from .glm import BernoulliGLM
from .linear_gaussian import LinearGaussian
from .lotka_volterra import LotkaVolterra, series_summaries
from .mg1 import MG1Queue
from .slcp import SLCP, SLCPDistractors
from .two_moons import TwoMoons, crescent_offset, forward_from_latents

__all__ = [
    "BernoulliGLM",
    "LinearGaussian",
    "LotkaVolterra",
    "MG1Queue",
    "SLCP",
    "SLCPDistractors",
    "Simulator",
    "TwoMoons",
    "available_simulators",
    "crescent_offset",
    "forward_from_latents",
    "get_simulator",
    "series_summaries",
]
