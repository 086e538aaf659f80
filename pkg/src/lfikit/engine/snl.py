"""Sequential neural likelihood: a flow over x given theta, with MCMC to
pull posterior samples out of prior times learned likelihood."""

from __future__ import annotations

import time

import numpy as np

from ..density import MAF, standardize_fit
from ..diffcore import tape
from ..transform.priors import is_uniform
from .config import ExperimentConfig
from .records import RoundRecord
from .seeds import rng_for, row_seeds
from .slice_sampler import slice_sample
from .table import SimTable
from .training import train_estimator


class _SnlState:
    def __init__(self, sim, config: ExperimentConfig):
        config.validate()
        self.sim = sim
        self.config = config
        self.master = config.seed
        self.prior = sim.prior
        self.x_o = np.asarray(config.x_o if config.x_o is not None else sim.x_o,
                              dtype=np.float64)
        self.table = SimTable(sim.theta_dim, sim.x_dim)
        # roles reversed: the flow models the data dimensions, conditioned
        # on the parameters
        self.arch = MAF(x_dim=sim.theta_dim, theta_dim=sim.x_dim,
                        n_mades=config.estimator.mades, hidden=config.estimator.hidden,
                        perm_seed=config.estimator.perm_seed)
        self.params = self.arch.init_params(rng_for(self.master, "init", 0))
        self.x_std = None
        self.theta_std = None
        self.divergence_restarts = 0

    def freeze_standardizers(self):
        self.x_std = standardize_fit(self.table.x)
        self.theta_std = standardize_fit(self.table.theta)

    def log_lik(self, theta: np.ndarray) -> float:
        """Learned log density of x_o given theta (standardized spaces)."""
        ts = self.theta_std.apply(theta)[None, :]
        xs = self.x_std.apply(self.x_o)[None, :]
        return float(self.arch.log_prob(self.params, ts, xs))

    def posterior_log_density(self, theta: np.ndarray) -> float:
        lp = float(self.prior.log_prob(theta))
        if not np.isfinite(lp):
            return -np.inf
        return lp + self.log_lik(theta)

    def mcmc_widths(self) -> np.ndarray:
        if is_uniform(self.prior):
            return (self.prior.upper - self.prior.lower) / 8.0
        return np.sqrt(np.diag(self.prior.cov))

    def sample_posterior(self, n: int, purpose_index: int) -> np.ndarray:
        cfg = self.config.snl
        per_chain = int(np.ceil(n / cfg.chains))
        out = []
        for chain in range(cfg.chains):
            rng = rng_for(self.master, "mcmc", purpose_index, chain)
            start = self.prior.sample(rng, 1)[0]
            target = self._guarded_target(rng)
            samples, _ = slice_sample(target, start, per_chain, rng,
                                      self.mcmc_widths(), burn_in=cfg.burn_in,
                                      thinning=cfg.thinning)
            out.append(samples)
        return np.concatenate(out)[:n]

    def _guarded_target(self, rng):
        def target(theta):
            val = self.posterior_log_density(theta)
            if np.isnan(val):
                self.divergence_restarts += 1
                return -np.inf
            return val
        return target


def snl_run(sim, config: ExperimentConfig):
    state = _SnlState(sim, config)
    records = []
    for round_index in range(1, config.rounds + 1):
        t0 = time.time()
        n = config.sims_per_round
        if round_index == 1:
            thetas = state.prior.sample(rng_for(state.master, "proposal", round_index), n)
            label = "prior"
        else:
            thetas = state.sample_posterior(n, purpose_index=round_index)
            label = f"mcmc@round{round_index - 1}"
        xs = sim.simulate_batch(thetas, row_seeds(state.master, round_index, n))
        state.table.append(thetas, xs, round_index, proposal_id=round_index - 1)
        if round_index == 1:
            state.freeze_standardizers()

        def batch_loss(root, idx):
            ts = state.theta_std.apply(state.table.theta[idx])
            xs_b = state.x_std.apply(state.table.x[idx])
            return -tape.sum_(state.arch.log_prob(state.params, ts, xs_b, root=root))

        def val_loss(params_eval, idx):
            saved, state.params = state.params, params_eval
            try:
                return float(tape.value_of(batch_loss(None, idx))) / idx.size
            finally:
                state.params = saved

        result = train_estimator(state.params, batch_loss, state.table.n_rows,
                                 config.training,
                                 rng_for(state.master, "train", round_index),
                                 val_loss=val_loss)
        state.params = result.params
        samples = state.sample_posterior(config.posterior_samples,
                                         purpose_index=1000 + round_index)
        records.append(RoundRecord(
            round_index, label, state.params.copy(), samples,
            metrics={"table_rows": float(state.table.n_rows),
                     "rows_in_loss": float(result.rows_touched),
                     "val_loss": result.best_val_loss,
                     "epochs": float(result.epochs_run),
                     "divergence_restarts": float(state.divergence_restarts),
                     "wall_time": time.time() - t0}))
    return records, state.table
