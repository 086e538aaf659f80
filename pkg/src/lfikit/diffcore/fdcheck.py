"""Finite-difference gradient verification."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError
from . import tape
from .params import ParamVector


def grad_of_scalar(loss_fn, params: ParamVector) -> np.ndarray:
    """Gradient of a recorded scalar loss with respect to all parameters.

    loss_fn takes the graph leaf over params.values and returns a scalar
    node. Every parameter slot receives an adjoint (zero where the loss
    does not depend on it).
    """
    root = tape.leaf(params.values)
    loss = loss_fn(root)
    if not isinstance(loss, tape.Node):
        raise NumericError("loss_fn must return a graph node")
    tape.backward(loss)
    return np.zeros_like(params.values) if root.grad is None else root.grad


def finite_diff_check(f, params: ParamVector, h: float = 1e-5,
                      grad: np.ndarray | None = None) -> float:
    """Max relative error between reverse-mode and central-difference gradients.

    f maps a flat parameter array to a scalar and must be written with the
    tape operator set, so it accepts either an ndarray or a graph node.
    Returns max_i |g_i - ghat_i| / (|g_i| + |ghat_i| + 1e-12).
    """
    if h <= 0:
        raise NumericError("finite-difference step must be positive")
    if grad is None:
        grad = grad_of_scalar(lambda root: f(root), params)
    base = params.values
    ghat = np.zeros_like(base)
    for i in range(base.size):
        up = base.copy()
        dn = base.copy()
        up[i] += h
        dn[i] -= h
        f_up = float(tape.value_of(f(up)))
        f_dn = float(tape.value_of(f(dn)))
        if not (np.isfinite(f_up) and np.isfinite(f_dn)):
            raise NumericError(f"non-finite function value at coordinate {i}")
        ghat[i] = (f_up - f_dn) / (2.0 * h)
    rel = np.abs(grad - ghat) / (np.abs(grad) + np.abs(ghat) + 1e-12)
    return float(np.max(rel)) if rel.size else 0.0
