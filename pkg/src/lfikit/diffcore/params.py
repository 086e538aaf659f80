"""Flat float64 parameter vectors with named (offset, shape) segments."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, NumericError
from . import tape


class ParamVector:
    """All trainable weights of one model as a single flat float64 array.

    layout maps segment name -> (offset, shape); segments are disjoint and
    cover the vector exactly.
    """

    def __init__(self, values: np.ndarray, layout: dict):
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.layout = dict(layout)
        self._validate()

    def _validate(self):
        if self.values.ndim != 1:
            raise ConfigurationError("parameter vector must be flat")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("parameter vector contains non-finite values")
        spans = sorted((off, off + int(np.prod(shape, dtype=int)))
                       for off, shape in self.layout.values())
        cursor = 0
        for lo, hi in spans:
            if lo != cursor:
                raise ConfigurationError("parameter segments must be disjoint and contiguous")
            cursor = hi
        if cursor != self.values.size:
            raise ConfigurationError("parameter segments must cover the full vector")

    @property
    def size(self) -> int:
        return self.values.size

    def segment(self, name: str) -> np.ndarray:
        """View of one named segment, reshaped."""
        off, shape = self.layout[name]
        n = int(np.prod(shape, dtype=int))
        return self.values[off:off + n].reshape(shape)

    def segment_node(self, root: tape.Node, name: str) -> tape.Node:
        """Graph view of one segment, sliced out of the flat leaf node."""
        off, shape = self.layout[name]
        n = int(np.prod(shape, dtype=int))
        return tape.reshape(root[off:off + n], shape)

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.layout)

    def with_values(self, values: np.ndarray) -> "ParamVector":
        if values.shape != self.values.shape:
            raise ConfigurationError("replacement values have the wrong size")
        return ParamVector(values, self.layout)

    # -- serialization: flat little-endian f64 + json manifest ---------------

    def save(self, prefix) -> None:
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".bin").write_bytes(self.values.astype("<f8").tobytes())
        manifest = {
            "dtype": "<f8",
            "size": int(self.values.size),
            "layout": {k: {"offset": int(off), "shape": [int(s) for s in shape]}
                       for k, (off, shape) in self.layout.items()},
        }
        prefix.with_suffix(".json").write_text(json.dumps(manifest, indent=2, sort_keys=True))

    @classmethod
    def load(cls, prefix) -> "ParamVector":
        prefix = Path(prefix)
        manifest = json.loads(prefix.with_suffix(".json").read_text())
        raw = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<f8")
        if raw.size != manifest["size"]:
            raise ConfigurationError("parameter file size does not match manifest")
        layout = {k: (v["offset"], tuple(v["shape"])) for k, v in manifest["layout"].items()}
        return cls(raw.astype(np.float64), layout)


def build_layout(segment_shapes: dict) -> tuple[dict, int]:
    """Pack named shapes into a contiguous layout; returns (layout, total)."""
    layout = {}
    off = 0
    for name, shape in segment_shapes.items():
        shape = tuple(int(s) for s in shape)
        layout[name] = (off, shape)
        off += int(np.prod(shape, dtype=int))
    return layout, off
