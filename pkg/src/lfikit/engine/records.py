"""Per-round artifacts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diffcore import ParamVector


@dataclass
class RoundRecord:
    round_index: int
    proposal_label: str
    params: ParamVector | None
    posterior_samples: np.ndarray
    acceptance_rate: float | None = None
    metrics: dict = field(default_factory=dict)
    failure: str | None = None
    # in-memory evaluation hooks (not persisted): unnormalized-by-truncation
    # posterior density and a proposal-free sampler for this round's estimate
    posterior_log_prob: object = None
    posterior_sampler: object = None
    proposal_obj: object = None  # the proposal this round's rows were drawn from
