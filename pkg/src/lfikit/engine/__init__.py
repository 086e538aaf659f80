"""Multi-round inference loops and their baselines."""

from .apt import apt_atomic_run, apt_run
from .config import (
    ALGORITHMS,
    EstimatorConfig,
    ExperimentConfig,
    SmcConfig,
    SnlConfig,
    TrainingConfig,
)
from .estimators import StandardizedEstimator, build_estimator
from .records import RoundRecord
from .seeds import rng_for, row_seeds, seed_sequence
from .slice_sampler import slice_sample
from .smc_abc import smc_abc_run
from .snl import snl_run
from .snpe import snpe_a_run, snpe_b_run
from .table import SimTable
from .training import TrainResult, train_estimator

_RUNNERS = {
    "apt-mog": apt_run,
    "apt-atomic": apt_atomic_run,
    "snpe-a": snpe_a_run,
    "snpe-b": snpe_b_run,
    "snl": snl_run,
    "smc-abc": smc_abc_run,
}


def run_experiment(sim, config: ExperimentConfig):
    """Dispatch to the configured algorithm; returns (records, table)."""
    return _RUNNERS[config.algorithm](sim, config)


__all__ = [
    "ALGORITHMS",
    "EstimatorConfig",
    "ExperimentConfig",
    "RoundRecord",
    "SimTable",
    "SmcConfig",
    "SnlConfig",
    "StandardizedEstimator",
    "TrainResult",
    "TrainingConfig",
    "apt_atomic_run",
    "apt_run",
    "build_estimator",
    "rng_for",
    "row_seeds",
    "run_experiment",
    "seed_sequence",
    "slice_sample",
    "smc_abc_run",
    "snl_run",
    "snpe_a_run",
    "snpe_b_run",
    "train_estimator",
]
