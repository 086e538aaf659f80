"""Baseline sequential posterior estimators: post-hoc correction (A) and
importance weighting (B)."""

from __future__ import annotations

import time
import warnings

import numpy as np

from ..diffcore import tape
from ..errors import LeakageTooHigh, NonPositiveDefinite
from ..transform import snpe_a_correct, support_mass, truncated_posterior_sample
from .apt import SequentialState
from .config import ExperimentConfig
from .proposals import DistributionProposal, PriorProposal
from .records import RoundRecord
from .seeds import rng_for
from .training import train_estimator

MAX_IMPORTANCE_WEIGHT = 1e4


def _nll_loss_builder(state, weights=None):
    def batch_loss(root, idx):
        xs, ts = state.std_rows(idx)
        lp = state.arch.log_prob(state.params, xs, ts, root=root)
        if weights is None:
            return -tape.sum_(lp)
        return -tape.sum_(tape.mul(lp, weights[idx]))

    def val_loss(params_eval, idx):
        saved, state.params = state.params, params_eval
        try:
            return float(tape.value_of(batch_loss(None, idx))) / idx.size
        finally:
            state.params = saved

    return batch_loss, val_loss


def _sample_corrected(dist, prior, state, round_index):
    rng = rng_for(state.master, "posterior", round_index)
    return truncated_posterior_sample(lambda r, k: dist.sample(r, k), prior, rng,
                                      state.config.posterior_samples)


def snpe_a_run(sim, config: ExperimentConfig):
    """Trains on the current round only, targeting the proposal posterior,
    then solves for the true posterior after each round. The correction can
    produce invalid covariances; that failure ends the run gracefully with
    the rounds completed so far."""
    state = SequentialState(sim, config)
    proposal = PriorProposal(state.prior)
    proposal_dist = None  # Gaussian from round 2 on

    for round_index in range(1, config.rounds + 1):
        t0 = time.time()
        state.simulate_round(proposal, round_index)
        state.maybe_reinit(round_index)
        current = np.flatnonzero(state.table.round_index == round_index)

        batch_loss, val_loss = _nll_loss_builder(state)

        def batch_loss_current(root, idx, _c=current):
            return batch_loss(root, _c[idx])

        def val_loss_current(params_eval, idx, _c=current):
            return val_loss(params_eval, _c[idx])

        result = train_estimator(state.params, batch_loss_current, current.size,
                                 config.training,
                                 rng_for(state.master, "train", round_index),
                                 val_loss=val_loss_current)
        state.params = result.params

        emitted = state.wrapper.emit(state.params, state.x_o)
        try:
            if proposal_dist is None:
                corrected = emitted
            else:
                corrected = snpe_a_correct(emitted, proposal_dist, state.prior)
        except NonPositiveDefinite as err:
            state.records.append(RoundRecord(
                round_index, proposal.label, state.params.copy(),
                np.empty((0, sim.theta_dim)), metrics={"wall_time": time.time() - t0},
                failure=f"correction failed: {err}"))
            break
        try:
            samples, rate = _sample_corrected(corrected, state.prior, state, round_index)
        except LeakageTooHigh as err:
            state.records.append(RoundRecord(
                round_index, proposal.label, state.params.copy(),
                err.samples, acceptance_rate=err.acceptance_rate,
                metrics={"wall_time": time.time() - t0},
                failure="corrected posterior leaks almost all mass"))
            break
        rec = RoundRecord(
            round_index, proposal.label, state.params.copy(), samples,
            acceptance_rate=rate,
            metrics={"table_rows": float(state.table.n_rows),
                     "rows_in_loss": float(result.rows_touched),
                     "val_loss": result.best_val_loss,
                     "epochs": float(result.epochs_run),
                     "wall_time": time.time() - t0})
        rec.posterior_log_prob = (lambda t, d=corrected: float(d.log_prob(np.atleast_1d(t))))
        rec.posterior_sampler = (lambda rng, k, d=corrected: d.sample(rng, k))
        state.records.append(rec)
        proposal_dist = corrected.moment_match_gaussian()
        proposal = DistributionProposal(proposal_dist, state.prior,
                                        label=f"gaussian@round{round_index}")
    return state.records, state.table


def snpe_b_run(sim, config: ExperimentConfig):
    """Pools all rounds with per-row importance weights prior/proposal.

    Rows simulated from the prior carry weight one; later rounds divide by
    their (support-normalized) mixture proposal density. Overflowing
    weights are clipped with a warning.
    """
    state = SequentialState(sim, config)
    proposal = PriorProposal(state.prior)
    weights = np.empty(0)
    clipped = 0

    for round_index in range(1, config.rounds + 1):
        t0 = time.time()
        state.simulate_round(proposal, round_index)
        state.maybe_reinit(round_index)
        rows = np.flatnonzero(state.table.round_index == round_index)
        if isinstance(proposal, PriorProposal):
            w_new = np.ones(rows.size)
        else:
            thetas = state.table.theta[rows]
            mass = support_mass(lambda r, k: proposal.dist.sample(r, k), state.prior,
                                rng_for(state.master, "proposal", round_index, 1))
            log_prop = proposal.dist.log_prob(thetas) - np.log(max(mass, 1e-12))
            w_new = np.exp(state.prior.log_prob(thetas) - log_prop)
            over = w_new > MAX_IMPORTANCE_WEIGHT
            if np.any(over):
                clipped += int(over.sum())
                warnings.warn(f"clipped {int(over.sum())} importance weights "
                              f"at {MAX_IMPORTANCE_WEIGHT:g}", RuntimeWarning)
                w_new = np.minimum(w_new, MAX_IMPORTANCE_WEIGHT)
        weights = np.concatenate([weights, w_new])

        batch_loss, val_loss = _nll_loss_builder(state, weights=weights)
        result = train_estimator(state.params, batch_loss, state.table.n_rows,
                                 config.training,
                                 rng_for(state.master, "train", round_index),
                                 val_loss=val_loss)
        state.params = result.params
        state.record(round_index, proposal, result,
                     extra={"wall_time": time.time() - t0,
                            "weight_variance": float(np.var(w_new)),
                            "weights_clipped": float(clipped)})
        emitted = state.wrapper.emit(state.params, state.x_o)
        proposal = DistributionProposal(emitted, state.prior,
                                        label=f"mog@round{round_index}")
    return state.records, state.table
