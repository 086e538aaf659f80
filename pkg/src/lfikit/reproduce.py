"""Benchmark algorithm matrices with per-round metric tables."""

from __future__ import annotations

import csv
import logging
import time
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .config import _build_section
from .engine import EstimatorConfig, ExperimentConfig, run_experiment
from .engine.seeds import rng_for
from .errors import ConfigurationError, LfikitError
from .evaluation import (
    median_distance,
    mmd,
    neg_log_prob_true_params,
    slcp_reference_posterior,
    two_moons_reference_posterior,
)
from .evaluation.references import glm_reference_posterior
from .simulators import get_simulator

log = logging.getLogger("lfikit")

FIGURES = ("two-moons", "slcp", "slcp-distractors", "lv", "mg1", "glm")


def load_preset(figure: str) -> dict:
    fname = figure.replace("-", "_") + ".yaml"
    with resources.files("lfikit.presets").joinpath(fname).open() as fh:
        return yaml.safe_load(fh)


def _reference_samples(name: str | None, cache_dir, n: int = 10_000):
    if name is None:
        return None
    if name == "two_moons":
        return two_moons_reference_posterior().sample(rng_for(0, "eval", 42), n)
    if name == "slcp":
        return slcp_reference_posterior(n_samples=n, cache_dir=cache_dir)
    if name == "glm":
        return glm_reference_posterior(n_samples=n, cache_dir=cache_dir)
    raise ConfigurationError(f"unknown reference {name!r}")


def _kde_log_prob(samples: np.ndarray):
    from scipy.stats import gaussian_kde

    kde = gaussian_kde(samples.T)
    return lambda t: float(kde.logpdf(np.atleast_1d(t))[0])


def _round_metric_rows(label: str, sim, records, reference, metric_names,
                       seed: int, median_subsample: int = 1000):
    rows = []
    theta_star = sim.theta_star
    for rec in records:
        if rec.failure:
            rows.append((label, rec.round_index, "failed", 1.0))
            continue
        for name, value in sorted(rec.metrics.items()):
            rows.append((label, rec.round_index, name, value))
        samples = rec.posterior_samples
        if "mmd" in metric_names and reference is not None and samples.shape[0] >= 2:
            rows.append((label, rec.round_index, "mmd",
                         mmd(samples, reference)))
        if "nlp" in metric_names and theta_star is not None:
            log_prob = rec.posterior_log_prob or _kde_log_prob(samples)
            sampler = rec.posterior_sampler or (
                lambda rng, k, s=samples: s[rng.integers(0, s.shape[0], size=k)])
            value = neg_log_prob_true_params(
                log_prob, sampler, sim.prior, theta_star,
                rng_for(seed, "eval", rec.round_index), n_mass_draws=20_000)
            rows.append((label, rec.round_index, "nlp", value))
        if "median_distance" in metric_names:
            sub = samples[rng_for(seed, "eval", 90 + rec.round_index).choice(
                samples.shape[0], size=min(median_subsample, samples.shape[0]),
                replace=False)]
            med, failures = median_distance(sub, sim.simulate, sim.x_o, seed)
            rows.append((label, rec.round_index, "median_distance", med))
            if failures:
                rows.append((label, rec.round_index, "median_distance_failures",
                             float(failures)))
    return rows


def run_benchmark_matrix(figure: str, outdir: Path, quick: bool = False,
                         rounds: int | None = None, sims: int | None = None,
                         algorithms=None, seed: int = 1):
    """Run every applicable algorithm on one benchmark and write a long-form
    per-round metric table. A failing algorithm is recorded and the matrix
    continues."""
    if figure not in FIGURES:
        raise ConfigurationError(f"unknown figure {figure!r}")
    preset = load_preset(figure)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scale = dict(preset.get("quick", {})) if quick else {}
    n_rounds = rounds or scale.get("rounds", preset["rounds"])
    n_sims = sims or scale.get("sims_per_round", preset["sims_per_round"])
    n_post = scale.get("posterior_samples", preset.get("posterior_samples", 10_000))
    cache_dir = outdir / "reference_cache"
    reference = _reference_samples(preset.get("reference"), cache_dir)
    metric_names = set(preset.get("metrics", []))
    chosen = algorithms or list(preset["algorithms"])

    variants = preset.get("simulator_variants") or [{}]
    all_rows = []
    for variant in variants:
        sim_opts = dict(preset.get("simulator_options", {}))
        sim_opts.update(variant.get("options", {}))
        sim = get_simulator(preset["simulator"], **sim_opts)
        suffix = variant.get("label", "")
        for algo in chosen:
            if algo not in preset["algorithms"]:
                raise ConfigurationError(
                    f"{algo!r} not applicable to {figure}; choose from "
                    f"{sorted(preset['algorithms'])}")
            spec = preset["algorithms"][algo] or {}
            label = algo + suffix
            cfg = ExperimentConfig(
                simulator=preset["simulator"],
                simulator_options=sim_opts,
                algorithm=algo,
                estimator=_build_section(EstimatorConfig, spec.get("estimator"),
                                         "estimator"),
                rounds=n_rounds,
                sims_per_round=n_sims,
                atoms=preset.get("atoms", 100),
                atoms_fallback=True,
                posterior_samples=n_post,
                seed=seed,
            )
            t0 = time.time()
            log.info("reproduce %s: running %s", figure, label)
            try:
                records, _ = run_experiment(sim, cfg)
            except LfikitError as err:
                log.warning("%s failed: %s", label, err)
                all_rows.append((label, 0, "failed", 1.0))
                continue
            rows = _round_metric_rows(label, sim, records, reference,
                                      metric_names, seed)
            rows.append((label, len(records), "total_wall_time", time.time() - t0))
            all_rows.extend(rows)
            _write_table(outdir / "summary.csv", all_rows)
    _write_table(outdir / "summary.csv", all_rows)
    log.info("wrote %s", outdir / "summary.csv")
    return all_rows


def _write_table(path: Path, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "round", "metric", "value"])
        for row in rows:
            writer.writerow([row[0], row[1], row[2], f"{row[3]:.17g}"])
