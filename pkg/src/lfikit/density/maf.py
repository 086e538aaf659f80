"""Conditional masked autoregressive flows built from MADE blocks."""

from __future__ import annotations

import numpy as np

from .. import diffcore as dc
from ..diffcore import tape
from ..errors import ConfigurationError, NumericError

_LOG_2PI = np.log(2.0 * np.pi)


def made_degrees(n_inputs: int, n_hiddens) -> list:
    """Sequential degree assignment for inputs and each hidden layer."""
    degrees = [np.arange(1, n_inputs + 1)]
    for h in n_hiddens:
        degrees.append(np.arange(h) % max(1, n_inputs - 1) + min(1, n_inputs - 1))
    return degrees


def made_masks(degrees: list):
    """Binary connectivity masks enforcing the autoregressive property."""
    hidden = [(d0[:, None] <= d1[None, :]).astype(np.float64)
              for d0, d1 in zip(degrees[:-1], degrees[1:])]
    out = (degrees[-1][:, None] < degrees[0][None, :]).astype(np.float64)
    return hidden, out


class MAF:
    """Stack of conditional MADE transforms over theta with base N(0, I).

    Each block permutes its input with a fixed (seeded) permutation, then
    applies per-coordinate shift and log-scale networks whose masks allow
    coordinate i to depend only on earlier coordinates. The conditioning
    input feeds the first layer of every block, unmasked.
    """

    kind = "maf"

    def __init__(self, x_dim: int, theta_dim: int, n_mades: int = 5,
                 hidden=(50, 50), perm_seed: int = 0):
        if n_mades < 1:
            raise ConfigurationError("n_mades must be >= 1")
        self.x_dim = int(x_dim)
        self.theta_dim = int(theta_dim)
        self.n_mades = int(n_mades)
        self.hidden = tuple(int(h) for h in hidden)
        self.perm_seed = int(perm_seed)
        n = self.theta_dim
        degrees = made_degrees(n, self.hidden)
        self._hidden_masks, self._out_mask = made_masks(degrees)
        perm_rng = np.random.default_rng(self.perm_seed)
        self.perms = [perm_rng.permutation(n) for _ in range(self.n_mades)]
        # z = v @ P  <=>  z[..., j] = v[..., perm[j]]
        self._perm_mats = []
        for perm in self.perms:
            p = np.zeros((n, n))
            p[perm, np.arange(n)] = 1.0
            self._perm_mats.append(p)
        shapes = {}
        for l in range(self.n_mades):
            widths = (n,) + self.hidden
            shapes[f"m{l}_Wx"] = (self.x_dim, self.hidden[0])
            for j, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
                shapes[f"m{l}_W{j}"] = (a, b)
                shapes[f"m{l}_b{j}"] = (b,)
            shapes[f"m{l}_Wshift"] = (self.hidden[-1], n)
            shapes[f"m{l}_bshift"] = (n,)
            shapes[f"m{l}_Wscale"] = (self.hidden[-1], n)
            shapes[f"m{l}_bscale"] = (n,)
        self.segment_shapes = shapes
        self.layout, self.n_params = dc.build_layout(shapes)

    def init_params(self, rng: np.random.Generator) -> dc.ParamVector:
        return dc.ParamVector(dc.init_segments(self.segment_shapes, rng), self.layout)

    def manifest(self) -> dict:
        return {"kind": self.kind, "x_dim": self.x_dim, "theta_dim": self.theta_dim,
                "n_mades": self.n_mades, "hidden": list(self.hidden),
                "perm_seed": self.perm_seed}

    # -- single MADE --------------------------------------------------------

    def _seg(self, params, root):
        if root is None:
            return params.segment
        return lambda name: params.segment_node(root, name)

    def _x_projection(self, seg, l, x):
        return tape.matmul(x, seg(f"m{l}_Wx"))

    def block_shift_scale(self, seg, l: int, z, xproj):
        """Shift and log-scale heads of block l on permuted input z."""
        h = tape.tanh(tape.matmul(z, tape.mul(seg(f"m{l}_W0"), self._hidden_masks[0]))
                      + xproj + seg(f"m{l}_b0"))
        for j in range(1, len(self.hidden)):
            h = tape.tanh(tape.matmul(h, tape.mul(seg(f"m{l}_W{j}"), self._hidden_masks[j]))
                          + seg(f"m{l}_b{j}"))
        shift = tape.matmul(h, tape.mul(seg(f"m{l}_Wshift"), self._out_mask)) + seg(f"m{l}_bshift")
        log_scale = tape.matmul(h, tape.mul(seg(f"m{l}_Wscale"), self._out_mask)) + seg(f"m{l}_bscale")
        return shift, log_scale

    # -- densities ----------------------------------------------------------

    def _log_prob_shaped(self, params, theta, xprojs, root):
        seg = self._seg(params, root)
        v = theta
        acc = 0.0
        for l in range(self.n_mades):
            z = tape.matmul(v, self._perm_mats[l])
            shift, log_scale = self.block_shift_scale(seg, l, z, xprojs[l])
            v = tape.mul(z - shift, tape.exp(-log_scale))
            acc = acc + tape.sum_(-log_scale, axis=-1)
        base = -0.5 * tape.sum_(tape.square(v), axis=-1) - 0.5 * self.theta_dim * _LOG_2PI
        return base + acc

    def _check_inputs(self, x, theta):
        x_arr, t_arr = tape.value_of(x), tape.value_of(theta)
        if x_arr.shape[-1] != self.x_dim or t_arr.shape[-1] != self.theta_dim:
            raise ConfigurationError("input dims do not match flow dims")
        if not (np.all(np.isfinite(x_arr)) and np.all(np.isfinite(t_arr))):
            raise NumericError("non-finite flow input")

    def log_prob(self, params, x, theta, root=None):
        """log q(theta_b | x_b) for aligned batches; (B,)."""
        self._check_inputs(x, theta)
        seg = self._seg(params, root)
        xprojs = [self._x_projection(seg, l, x) for l in range(self.n_mades)]
        return self._log_prob_shaped(params, theta, xprojs, root)

    def pair_log_prob(self, params, x, theta, root=None):
        """Q[i, j] = log q(theta_j | x_i): one feedforward pass per pair,
        with the conditioning projections computed once per x."""
        self._check_inputs(x, theta)
        seg = self._seg(params, root)
        m = tape.value_of(x).shape[0]
        theta_e = tape.reshape(theta, (1, -1, self.theta_dim))
        xprojs = [tape.reshape(self._x_projection(seg, l, x), (m, 1, self.hidden[0]))
                  for l in range(self.n_mades)]
        return self._log_prob_shaped(params, theta_e, xprojs, root)

    def transform_to_base(self, params: dc.ParamVector, x: np.ndarray,
                          theta: np.ndarray) -> np.ndarray:
        """Forward transform of theta into base-noise space (numpy only)."""
        seg = params.segment
        x = np.atleast_2d(x)
        xprojs = [self._x_projection(seg, l, x) for l in range(self.n_mades)]
        v = np.atleast_2d(theta)
        for l in range(self.n_mades):
            z = v @ self._perm_mats[l]
            shift, log_scale = self.block_shift_scale(seg, l, z, xprojs[l])
            v = (z - shift) * np.exp(-log_scale)
        return v

    def sample(self, params: dc.ParamVector, x: np.ndarray,
               rng: np.random.Generator, size: int) -> np.ndarray:
        """Sequential inversion of the stack, batched over samples."""
        seg = params.segment
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[0] != 1:
            raise ConfigurationError("sampling conditions on a single x")
        n = self.theta_dim
        v = rng.standard_normal((size, n))
        for l in reversed(range(self.n_mades)):
            xproj = self._x_projection(seg, l, x)
            u = v
            z = np.zeros((size, n))
            for j in range(n):
                shift, log_scale = self.block_shift_scale(seg, l, z, xproj)
                z[:, j] = u[:, j] * np.exp(log_scale[:, j]) + shift[:, j]
            v = z @ self._perm_mats[l].T
        return v
