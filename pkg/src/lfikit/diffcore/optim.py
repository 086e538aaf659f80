"""Adam with bias correction, in functional form."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import NumericError
from .params import ParamVector


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    hyper: AdamHyper = field(default_factory=AdamHyper)

    @classmethod
    def init(cls, n_params: int, hyper: AdamHyper | None = None) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), 0, hyper or AdamHyper())


def adam_step(params: ParamVector, grads: np.ndarray, state: AdamState):
    """One bias-corrected Adam update; returns (new params, new state).

    Non-finite gradients reject the step: the input state is returned
    unchanged and NumericError is raised.
    """
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != params.values.shape:
        raise NumericError("gradient shape does not match parameters")
    if not np.all(np.isfinite(grads)):
        raise NumericError("non-finite gradient; step rejected")
    h = state.hyper
    t = state.step_count + 1
    m = h.beta1 * state.first_moment + (1.0 - h.beta1) * grads
    v = h.beta2 * state.second_moment + (1.0 - h.beta2) * grads * grads
    m_hat = m / (1.0 - h.beta1 ** t)
    v_hat = v / (1.0 - h.beta2 ** t)
    new_values = params.values - h.learning_rate * m_hat / (np.sqrt(v_hat) + h.eps)
    return params.with_values(new_values), AdamState(m, v, t, h)
