"""Sequential Monte Carlo ABC with Gaussian perturbation kernels."""

from __future__ import annotations

import time

import numpy as np

from ..transform.priors import is_uniform
from .config import ExperimentConfig
from .records import RoundRecord
from .seeds import rng_for
from .table import SimTable


def _effective_sample_size(weights: np.ndarray) -> float:
    return float(1.0 / np.sum(weights**2))


def smc_abc_run(sim, config: ExperimentConfig):
    """Population Monte Carlo ABC: start from the prior, then repeatedly
    resample-perturb-accept under a shrinking distance tolerance (the
    configured quantile of the previous generation's accepted distances).
    Zero acceptances within the simulation budget halt the schedule with
    the populations built so far."""
    config.validate()
    cfg = config.smc
    master = config.seed
    prior = sim.prior
    x_o = np.asarray(config.x_o if config.x_o is not None else sim.x_o,
                     dtype=np.float64)
    n = cfg.particles
    table = SimTable(sim.theta_dim, sim.x_dim)
    records = []
    sims_total = 0

    rng = rng_for(master, "smc", 0)
    thetas = prior.sample(rng, n)
    xs = np.array([sim.simulate(t, rng_for(master, "smc", 1, j))
                   for j, t in enumerate(thetas)])
    table.append(thetas, xs, 1, proposal_id=0)
    sims_total += n
    scale = xs.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)

    def distance(x):
        return float(np.linalg.norm((x - x_o) / scale))

    dists = np.array([distance(x) for x in xs])
    weights = np.full(n, 1.0 / n)
    eps = float(np.quantile(dists, cfg.acceptance_quantile))
    records.append(_make_record(1, thetas, weights, dists, np.inf, sims_total,
                                config, master, time.time()))

    for gen in range(2, cfg.generations + 1):
        t0 = time.time()
        cov = 2.0 * np.cov(thetas.T, aweights=weights).reshape(sim.theta_dim,
                                                               sim.theta_dim)
        cov += 1e-12 * np.eye(sim.theta_dim)
        chol = np.linalg.cholesky(cov)
        rng = rng_for(master, "smc", gen)
        new_thetas = np.empty_like(thetas)
        new_dists = np.empty(n)
        accepted = 0
        attempts = 0
        while accepted < n and attempts < cfg.max_sims_per_generation:
            idx = rng.choice(n, p=weights)
            cand = thetas[idx] + chol @ rng.standard_normal(sim.theta_dim)
            if is_uniform(prior) and not prior.inside(cand)[0]:
                continue
            attempts += 1
            x = sim.simulate(cand, rng_for(master, "smc", gen, attempts))
            d = distance(x)
            if d <= eps:
                new_thetas[accepted] = cand
                new_dists[accepted] = d
                accepted += 1
        sims_total += attempts
        if accepted == 0:
            records[-1].metrics["halted"] = 1.0
            break
        new_thetas = new_thetas[:accepted]
        new_dists = new_dists[:accepted]
        # importance reweighting against the perturbation mixture
        diff = new_thetas[:, None, :] - thetas[None, :, :]
        z = np.linalg.solve(chol, diff[..., None])[..., 0]
        log_kernel = -0.5 * np.sum(z * z, axis=-1)
        mix = np.log(weights)[None, :] + log_kernel
        hi = mix.max(axis=1, keepdims=True)
        log_mix = np.log(np.exp(mix - hi).sum(axis=1)) + hi[:, 0]
        log_w = prior.log_prob(new_thetas) - log_mix
        log_w -= log_w.max()
        new_weights = np.exp(log_w)
        new_weights /= new_weights.sum()

        thetas, weights, dists = new_thetas, new_weights, new_dists
        n = accepted  # the population shrinks if the budget ran out early
        eps_used = eps
        eps = float(np.quantile(dists, cfg.acceptance_quantile))
        records.append(_make_record(gen, thetas, weights, dists, eps_used,
                                    sims_total, config, master, t0,
                                    acceptance=accepted / max(attempts, 1)))
    return records, table


def _make_record(gen, thetas, weights, dists, eps, sims_total, config, master,
                 t0, acceptance=1.0) -> RoundRecord:
    rng = rng_for(master, "smc", 9000 + gen)
    idx = rng.choice(thetas.shape[0], size=config.posterior_samples, p=weights)
    return RoundRecord(
        gen, f"smc-eps={eps:.4g}", None, thetas[idx],
        metrics={"epsilon": float(eps),
                 "median_distance": float(np.median(dists)),
                 "ess": _effective_sample_size(weights),
                 "sims_total": float(sims_total),
                 "generation_acceptance": float(acceptance),
                 "wall_time": time.time() - t0})
