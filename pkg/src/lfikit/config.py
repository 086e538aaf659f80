"""YAML experiment configuration parsing."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .engine.config import (
    EstimatorConfig,
    ExperimentConfig,
    SmcConfig,
    SnlConfig,
    TrainingConfig,
)
from .errors import ConfigurationError
from .io import config_hash

_TOP_KEYS = {"experiment", "simulator", "simulator_options", "algorithm",
             "estimator", "rounds", "sims_per_round", "atoms", "atoms_fallback",
             "posterior_samples", "training", "smc", "snl", "seed", "x_o"}


def _build_section(cls, payload: dict, name: str):
    payload = payload or {}
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(payload) - known
    if unknown:
        raise ConfigurationError(f"unknown {name} keys: {sorted(unknown)}")
    if "hidden" in payload:
        payload["hidden"] = tuple(int(h) for h in payload["hidden"])
    return cls(**payload)


def parse_config(payload: dict) -> tuple:
    """dict -> (ExperimentConfig, experiment name, stable hash)."""
    if not isinstance(payload, dict):
        raise ConfigurationError("config must be a mapping")
    unknown = set(payload) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    name = str(payload.get("experiment", "experiment"))
    cfg = ExperimentConfig(
        simulator=payload.get("simulator", "linear_gaussian"),
        simulator_options=dict(payload.get("simulator_options") or {}),
        algorithm=payload.get("algorithm", "apt-atomic"),
        estimator=_build_section(EstimatorConfig, payload.get("estimator"), "estimator"),
        rounds=int(payload.get("rounds", 2)),
        sims_per_round=int(payload.get("sims_per_round", 1000)),
        atoms=int(payload.get("atoms", 100)),
        atoms_fallback=bool(payload.get("atoms_fallback", False)),
        posterior_samples=int(payload.get("posterior_samples", 10_000)),
        training=_build_section(TrainingConfig, payload.get("training"), "training"),
        smc=_build_section(SmcConfig, payload.get("smc"), "smc"),
        snl=_build_section(SnlConfig, payload.get("snl"), "snl"),
        seed=int(payload.get("seed", 1)),
        x_o=(None if payload.get("x_o") is None
             else np.asarray(payload["x_o"], dtype=np.float64)),
    )
    cfg.validate()
    return cfg, name, config_hash(_canonical(payload))


def _canonical(payload: dict) -> dict:
    """Resolved form: defaults filled in, so formatting and key order do
    not change the hash."""
    cfg_defaults = {
        "experiment": str(payload.get("experiment", "experiment")),
        "simulator": payload.get("simulator", "linear_gaussian"),
        "simulator_options": dict(payload.get("simulator_options") or {}),
        "algorithm": payload.get("algorithm", "apt-atomic"),
        "estimator": _section_dict(EstimatorConfig, payload.get("estimator")),
        "rounds": int(payload.get("rounds", 2)),
        "sims_per_round": int(payload.get("sims_per_round", 1000)),
        "atoms": int(payload.get("atoms", 100)),
        "atoms_fallback": bool(payload.get("atoms_fallback", False)),
        "posterior_samples": int(payload.get("posterior_samples", 10_000)),
        "training": _section_dict(TrainingConfig, payload.get("training")),
        "smc": _section_dict(SmcConfig, payload.get("smc")),
        "snl": _section_dict(SnlConfig, payload.get("snl")),
        "seed": int(payload.get("seed", 1)),
        "x_o": (None if payload.get("x_o") is None
                else [float(v) for v in payload["x_o"]]),
    }
    return cfg_defaults


def _section_dict(cls, payload) -> dict:
    obj = _build_section(cls, payload, cls.__name__)
    out = {}
    for field in cls.__dataclass_fields__:
        value = getattr(obj, field)
        out[field] = list(value) if isinstance(value, tuple) else value
    return out


def load_config(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    payload = yaml.safe_load(path.read_text())
    return parse_config(payload)


def resolved_config_yaml(payload: dict) -> str:
    return yaml.safe_dump(_canonical(payload), sort_keys=True)
