"""CSV and manifest persistence with exact round-trip guarantees."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

FLOAT_FMT = "%.17g"


def write_samples_csv(path, samples: np.ndarray, columns: list) -> None:
    """Header row, '.' decimals, 17 significant digits (bitwise round-trip)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if samples.shape[1] != len(columns):
        raise ConfigurationError("column names do not match sample width")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, samples, delimiter=",", header=",".join(columns),
               comments="", fmt=FLOAT_FMT)


def read_samples_csv(path) -> tuple:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    columns = header.split(",") if header else []
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    return data, columns


def write_sim_csv(path, thetas: np.ndarray, xs: np.ndarray, extra=None) -> None:
    """Simulation batches: theta columns then x columns."""
    thetas, xs = np.atleast_2d(thetas), np.atleast_2d(xs)
    cols = [f"theta{i+1}" for i in range(thetas.shape[1])]
    cols += [f"x{i+1}" for i in range(xs.shape[1])]
    data = np.column_stack([thetas, xs])
    if extra is not None:
        for name, values in extra.items():
            cols.append(name)
            data = np.column_stack([data, values])
    write_samples_csv(path, data, cols)


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def append_metric_record(path, experiment_id: str, round_index: int,
                         metric: str, value: float) -> None:
    """Metrics as one JSON record per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {"experiment-id": experiment_id, "round": int(round_index),
              "metric": metric, "value": float(value)}
    with path.open("a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def config_hash(payload: dict) -> str:
    """Stable under key reordering: canonical JSON, sorted keys."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
