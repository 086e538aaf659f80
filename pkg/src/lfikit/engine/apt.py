"""Multi-round posterior estimation with automatic proposal transforms:
the analytic Mixture-of-Gaussians path and the atomic path."""

from __future__ import annotations

import time

import numpy as np

from ..density import standardize_fit
from ..diffcore import tape
from ..errors import PrecisionNotPD
from ..transform import (
    atomic_loss_from_matrix,
    prior_log_weights,
    transformed_mog_log_prob,
    truncated_posterior_sample,
)
from ..transform.gaussian import GaussianDist, is_gaussian
from ..transform.priors import BoxUniform, is_uniform
from .config import ExperimentConfig
from .estimators import StandardizedEstimator, build_estimator
from .proposals import DistributionProposal, EstimatorProposal, PriorProposal
from .records import RoundRecord
from .seeds import rng_for, row_seeds
from .table import SimTable
from .training import train_estimator

__all__ = ["apt_run", "apt_atomic_run", "SequentialState"]


class SequentialState:
    """Shared scaffolding for the sequential (round-based) algorithms."""

    def __init__(self, sim, config: ExperimentConfig):
        config.validate()
        self.sim = sim
        self.config = config
        self.master = config.seed
        self.prior = sim.prior
        self.x_o = np.asarray(config.x_o if config.x_o is not None else sim.x_o,
                              dtype=np.float64)
        self.table = SimTable(sim.theta_dim, sim.x_dim)
        self.arch = build_estimator(config.estimator, sim.x_dim, sim.theta_dim)
        self.params = self.arch.init_params(rng_for(self.master, "init", 0))
        self.wrapper = None  # set after round-1 standardization
        self.records: list[RoundRecord] = []

    def simulate_round(self, proposal, round_index: int) -> None:
        n = self.config.sims_per_round
        thetas = proposal.sample(rng_for(self.master, "proposal", round_index), n)
        xs = self.sim.simulate_batch(thetas, row_seeds(self.master, round_index, n))
        self.table.append(thetas, xs, round_index, proposal_id=round_index - 1)
        if round_index == 1:
            self._freeze_standardizers()

    def _freeze_standardizers(self) -> None:
        x_std = standardize_fit(self.table.x)
        theta_std = standardize_fit(self.table.theta)
        self.wrapper = StandardizedEstimator(self.arch, x_std, theta_std)

    def std_rows(self, idx: np.ndarray):
        return (self.wrapper.x_std.apply(self.table.x[idx]),
                self.wrapper.theta_std.apply(self.table.theta[idx]))

    def maybe_reinit(self, round_index: int) -> None:
        if self.config.training.reinit_each_round and round_index > 1:
            self.params = self.arch.init_params(rng_for(self.master, "init", round_index))

    def posterior_samples(self, round_index: int):
        rng = rng_for(self.master, "posterior", round_index)
        samples, rate = truncated_posterior_sample(
            lambda r, k: self.wrapper.sample(self.params, self.x_o, r, k),
            self.prior, rng, self.config.posterior_samples)
        return samples, rate

    def record(self, round_index: int, proposal, result, extra=None) -> RoundRecord:
        samples, rate = self.posterior_samples(round_index)
        metrics = {
            "table_rows": float(self.table.n_rows),
            "rows_in_loss": float(result.rows_touched),
            "val_loss": result.best_val_loss,
            "epochs": float(result.epochs_run),
            "steps_rejected": float(result.steps_rejected),
        }
        if extra:
            metrics.update(extra)
        rec = RoundRecord(round_index, proposal.label, self.params.copy(), samples,
                          acceptance_rate=rate, metrics=metrics)
        wrapper, params, x_o = self.wrapper, self.params.copy(), self.x_o
        rec.posterior_log_prob = (
            lambda t: float(wrapper.log_prob(params, np.atleast_2d(x_o),
                                             np.atleast_2d(t))[0]))
        rec.posterior_sampler = lambda rng, k: wrapper.sample(params, x_o, rng, k)
        self.records.append(rec)
        return rec


def _std_dist(dist, theta_std):
    """Map an original-space Gaussian/MoG into standardized coordinates."""
    if is_gaussian(dist):
        return dist.standardized(theta_std.shift, theta_std.scale)
    return dist.affine(-theta_std.shift / theta_std.scale, 1.0 / theta_std.scale)


def _std_prior(prior, theta_std):
    return prior.standardized(theta_std.shift, theta_std.scale)


def apt_run(sim, config: ExperimentConfig):
    """Analytic-proposal training: each row's loss is the log of the
    emitted mixture transformed by that row's own round proposal, so all
    rounds' data pool into one objective and the trained network reads off
    the true posterior directly."""
    state = SequentialState(sim, config)
    proposal = PriorProposal(state.prior)
    analytic_proposals = {0: None}  # proposal_id -> standardized MoG (None = prior)

    for round_index in range(1, config.rounds + 1):
        t0 = time.time()
        state.simulate_round(proposal, round_index)
        state.maybe_reinit(round_index)
        theta_std = state.wrapper.theta_std
        std_prior = _std_prior(state.prior, theta_std)

        def batch_loss(root, idx):
            total = None
            pids = state.table.proposal_id[idx]
            for pid in np.unique(pids):
                rows = idx[pids == pid]
                xs, ts = state.std_rows(rows)
                prop = analytic_proposals[int(pid)]
                if prop is None:
                    lp = state.arch.log_prob(state.params, xs, ts, root=root)
                else:
                    psi = state.arch.psi(state.params, xs, root=root)
                    lp = transformed_mog_log_prob(psi, ts, std_prior, prop)
                term = -tape.sum_(lp)
                total = term if total is None else total + term
            return total

        def val_loss(params_eval, idx):
            saved, state.params = state.params, params_eval
            try:
                return float(tape.value_of(batch_loss(None, idx))) / idx.size
            finally:
                state.params = saved

        try:
            result = train_estimator(state.params, batch_loss, state.table.n_rows,
                                     config.training,
                                     rng_for(state.master, "train", round_index),
                                     val_loss=val_loss)
        except PrecisionNotPD as err:
            raise PrecisionNotPD(f"round {round_index}: {err}") from err
        state.params = result.params
        state.record(round_index, proposal, result,
                     extra={"wall_time": time.time() - t0})

        emitted = state.wrapper.emit(state.params, state.x_o)
        analytic_proposals[round_index] = _std_dist(emitted, theta_std)
        proposal = DistributionProposal(emitted, state.prior,
                                        label=f"mog@round{round_index}")
    return state.records, state.table


def apt_atomic_run(sim, config: ExperimentConfig):
    """Atomic-proposal training: every minibatch is a without-replacement
    draw whose rows double as the atom set, turning the transform into a
    categorical normalization that works for any estimator."""
    state = SequentialState(sim, config)
    proposal = PriorProposal(state.prior)

    for round_index in range(1, config.rounds + 1):
        t0 = time.time()
        state.simulate_round(proposal, round_index)
        state.maybe_reinit(round_index)

        def batch_loss(root, idx):
            xs, ts = state.std_rows(idx)
            prior_logs = prior_log_weights(state.prior, state.table.theta[idx])
            pair = state.arch.pair_log_prob(state.params, xs, ts, root=root)
            return atomic_loss_from_matrix(pair, prior_logs)

        def val_loss(params_eval, idx):
            saved, state.params = state.params, params_eval
            try:
                total = 0.0
                count = 0
                for lo in range(0, idx.size - 1, config.atoms):
                    chunk = idx[lo:lo + config.atoms]
                    if chunk.size < 2:
                        continue
                    total += float(tape.value_of(batch_loss(None, chunk)))
                    count += chunk.size
                return total / max(count, 1)
            finally:
                state.params = saved

        result = train_estimator(state.params, batch_loss, state.table.n_rows,
                                 config.training,
                                 rng_for(state.master, "train", round_index),
                                 batch_size=config.atoms, min_batch=2,
                                 val_loss=val_loss)
        state.params = result.params
        extra = {"wall_time": time.time() - t0}
        if proposal.last_acceptance is not None:
            extra["proposal_acceptance"] = proposal.last_acceptance
        state.record(round_index, proposal, result, extra=extra)
        proposal = EstimatorProposal(state.wrapper, state.params, state.x_o,
                                     state.prior, label=f"estimator@round{round_index}")
    return state.records, state.table
