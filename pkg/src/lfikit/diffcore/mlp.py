"""Fully-connected tanh networks over the autodiff substrate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from . import tape
from .params import ParamVector, build_layout


@dataclass(frozen=True)
class MLPSpec:
    """Architecture of a fully-connected network."""

    input_dim: int
    hidden_layers: tuple
    output_dim: int
    activation: str = "tanh"
    prefix: str = ""

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        dims = (self.input_dim,) + self.hidden_layers + (self.output_dim,)
        if any(d < 1 for d in dims):
            raise ConfigurationError("all MLP dimensions must be >= 1")
        if self.activation != "tanh":
            raise ConfigurationError(f"unsupported activation: {self.activation}")

    @property
    def widths(self):
        return (self.input_dim,) + self.hidden_layers + (self.output_dim,)

    def segment_shapes(self) -> dict:
        shapes = {}
        ws = self.widths
        for i, (n_in, n_out) in enumerate(zip(ws[:-1], ws[1:])):
            shapes[f"{self.prefix}W{i}"] = (n_in, n_out)
            shapes[f"{self.prefix}b{i}"] = (n_out,)
        return shapes

    @property
    def n_layers(self) -> int:
        return len(self.hidden_layers) + 1


def init_segments(segment_shapes: dict, rng: np.random.Generator) -> np.ndarray:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases."""
    chunks = []
    for name, shape in segment_shapes.items():
        n = int(np.prod(shape, dtype=int))
        if len(shape) == 2:
            bound = 1.0 / np.sqrt(shape[0])
            chunks.append(rng.uniform(-bound, bound, size=n))
        else:
            chunks.append(np.zeros(n))
    return np.concatenate(chunks) if chunks else np.zeros(0)


def init_mlp_params(spec: MLPSpec, rng: np.random.Generator) -> ParamVector:
    shapes = spec.segment_shapes()
    layout, _ = build_layout(shapes)
    return ParamVector(init_segments(shapes, rng), layout)


def mlp_forward(spec: MLPSpec, params: ParamVector, inputs, root=None):
    """Forward pass on a (batch, input_dim) array.

    `root` is an optional graph leaf over params.values; when given, the
    output is a differentiable node, otherwise a plain ndarray.
    """
    x = tape.value_of(inputs) if root is None else inputs
    if np.shape(tape.value_of(x))[-1] != spec.input_dim:
        raise ConfigurationError(
            f"input dim {np.shape(tape.value_of(x))[-1]} != spec.input_dim {spec.input_dim}")
    seg = (params.segment if root is None
           else (lambda name: params.segment_node(root, name)))
    h = x
    for i in range(spec.n_layers):
        h = tape.matmul(h, seg(f"{spec.prefix}W{i}")) + seg(f"{spec.prefix}b{i}")
        if i < spec.n_layers - 1:
            h = tape.tanh(h)
    return h
