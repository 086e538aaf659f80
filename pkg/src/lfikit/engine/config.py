"""Typed experiment configuration and validation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

ALGORITHMS = ("apt-mog", "apt-atomic", "snpe-a", "snpe-b", "snl", "smc-abc")


@dataclass
class EstimatorConfig:
    kind: str = "mdn"            # mdn | maf
    components: int = 8
    mades: int = 5
    hidden: tuple = (50, 50)
    perm_seed: int = 0

    def validate(self):
        if self.kind not in ("mdn", "maf"):
            raise ConfigurationError(f"estimator.kind must be mdn or maf, got {self.kind!r}")
        if self.kind == "mdn" and self.components < 1:
            raise ConfigurationError("estimator.components must be >= 1")
        if self.kind == "maf" and self.mades < 1:
            raise ConfigurationError("estimator.mades must be >= 1")
        if not self.hidden or any(int(h) < 1 for h in self.hidden):
            raise ConfigurationError("estimator.hidden must be positive widths")


@dataclass
class TrainingConfig:
    learning_rate: float = 5e-4
    batch_size: int = 100
    max_epochs: int = 500
    patience: int = 20
    val_frac: float = 0.1
    max_rejections: int = 50
    reinit_each_round: bool = False

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigurationError("training.learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ConfigurationError("training sizes must be >= 1")
        if not 0.0 <= self.val_frac < 0.5:
            raise ConfigurationError("training.val_frac must be in [0, 0.5)")


@dataclass
class SmcConfig:
    particles: int = 1000
    generations: int = 10
    acceptance_quantile: float = 0.5
    max_sims_per_generation: int = 50_000


@dataclass
class SnlConfig:
    chains: int = 10
    burn_in: int = 200
    thinning: int = 1


@dataclass
class ExperimentConfig:
    simulator: str = "linear_gaussian"
    simulator_options: dict = field(default_factory=dict)
    algorithm: str = "apt-atomic"
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    rounds: int = 2
    sims_per_round: int = 1000
    atoms: int = 100
    atoms_fallback: bool = False
    posterior_samples: int = 10_000
    training: TrainingConfig = field(default_factory=TrainingConfig)
    smc: SmcConfig = field(default_factory=SmcConfig)
    snl: SnlConfig = field(default_factory=SnlConfig)
    seed: int = 1
    x_o: np.ndarray | None = None

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"algorithm must be one of {', '.join(ALGORITHMS)}; got {self.algorithm!r}")
        if self.rounds < 1:
            raise ConfigurationError("rounds must be >= 1")
        if self.sims_per_round < 1:
            raise ConfigurationError("sims_per_round must be >= 1")
        if self.algorithm == "apt-atomic":
            if self.atoms < 2:
                raise ConfigurationError("atoms must be >= 2")
            if self.atoms > self.rounds * self.sims_per_round and not self.atoms_fallback:
                raise ConfigurationError(
                    "atoms exceeds total simulation budget rounds*sims_per_round "
                    "and atoms_fallback is disabled")
        if self.algorithm == "apt-mog" and self.estimator.kind != "mdn":
            raise ConfigurationError("apt-mog requires an MDN estimator")
        if self.algorithm in ("snpe-a", "snpe-b") and self.estimator.kind != "mdn":
            raise ConfigurationError(f"{self.algorithm} requires an MDN estimator")
        if self.algorithm == "snl" and self.estimator.kind != "maf":
            raise ConfigurationError("snl requires a MAF estimator")
        if self.posterior_samples < 2:
            raise ConfigurationError("posterior_samples must be >= 2")
        self.estimator.validate()
        self.training.validate()
        return self
