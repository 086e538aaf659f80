"""Minibatch Adam with held-out early stopping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import AdamHyper, AdamState, ParamVector, adam_step, tape
from ..errors import NumericError, TrainingError
from .config import TrainingConfig


@dataclass
class TrainResult:
    params: ParamVector
    best_val_loss: float
    epochs_run: int
    rows_touched: int
    steps_rejected: int


def split_indices(n_rows: int, val_frac: float, rng: np.random.Generator):
    """Deterministic train/held-out split; held-out may be empty for tiny sets."""
    perm = rng.permutation(n_rows)
    n_val = int(round(val_frac * n_rows)) if n_rows >= 10 else 0
    return perm[n_val:], perm[:n_val]


def _chunks(indices: np.ndarray, size: int, min_size: int = 1):
    for lo in range(0, indices.size, size):
        chunk = indices[lo:lo + size]
        if chunk.size >= min_size:
            yield chunk


def train_estimator(params: ParamVector, batch_loss, n_rows: int,
                    cfg: TrainingConfig, rng: np.random.Generator,
                    batch_size: int | None = None, min_batch: int = 1,
                    val_loss=None) -> TrainResult:
    """Run epochs of minibatch Adam; return the best held-out parameters.

    batch_loss(root, idx) must give the summed loss over table rows idx as
    a scalar node. val_loss(params, idx) gives a per-row float on the
    held-out rows; when the split is empty the train epoch loss is used.
    Non-finite losses or gradients reject the step; too many consecutive
    rejections abort training.
    """
    if n_rows < 1:
        raise TrainingError("no rows to train on")
    batch_size = batch_size or cfg.batch_size
    train_idx, val_idx = split_indices(n_rows, cfg.val_frac, rng)
    if train_idx.size < min_batch:  # tiny tables: train on everything
        train_idx, val_idx = np.arange(n_rows), np.empty(0, dtype=int)

    state = AdamState.init(params.size, AdamHyper(learning_rate=cfg.learning_rate))
    params = params.copy()
    rows_touched: set = set(int(i) for i in val_idx)
    rejected_total = 0
    rejected_run = 0

    def held_out(p: ParamVector, fallback: float) -> float:
        if val_idx.size >= min_batch and val_loss is not None:
            return float(val_loss(p, val_idx))
        return fallback

    best_params = params.copy()
    best_val = np.inf
    best_epoch = 0
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(train_idx)
        epoch_loss = 0.0
        epoch_rows = 0
        for chunk in _chunks(order, batch_size, min_batch):
            root = tape.leaf(params.values)
            try:
                loss = batch_loss(root, chunk)
                tape.backward(loss)
                grad = np.zeros_like(params.values) if root.grad is None else root.grad
                params, state = adam_step(params, grad, state)
            except NumericError:
                rejected_total += 1
                rejected_run += 1
                if rejected_run >= cfg.max_rejections:
                    raise TrainingError(
                        f"{rejected_run} consecutive non-finite training steps")
                continue
            rejected_run = 0
            rows_touched.update(int(i) for i in chunk)
            epoch_loss += float(tape.value_of(loss))
            epoch_rows += chunk.size
        fallback = epoch_loss / max(epoch_rows, 1)
        current = held_out(params, fallback)
        if np.isfinite(current) and current < best_val:
            best_val = current
            best_params = params.copy()
            best_epoch = epoch
        if epoch - best_epoch >= cfg.patience:
            break
    return TrainResult(best_params, float(best_val), epoch, len(rows_touched),
                       rejected_total)
