"""Minimal reverse-mode differentiation and optimization substrate."""

from . import tape
from .fdcheck import finite_diff_check, grad_of_scalar
from .mlp import MLPSpec, init_mlp_params, init_segments, mlp_forward
from .optim import AdamHyper, AdamState, adam_step
from .params import ParamVector, build_layout

__all__ = [
    "tape",
    "finite_diff_check",
    "grad_of_scalar",
    "MLPSpec",
    "init_mlp_params",
    "init_segments",
    "mlp_forward",
    "AdamHyper",
    "AdamState",
    "adam_step",
    "ParamVector",
    "build_layout",
]
