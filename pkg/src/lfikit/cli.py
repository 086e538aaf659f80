"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration/validation error, 3 runtime error
(partial artifacts are kept).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import _canonical, load_config
from .engine import ExperimentConfig, run_experiment
from .engine.seeds import rng_for
from .errors import ConfigurationError, LfikitError
from .evaluation import (
    linear_gaussian_reference,
    median_heuristic_bandwidth,
    mmd,
    slcp_reference_posterior,
    two_moons_reference_posterior,
)
from .io import append_metric_record, config_hash, read_samples_csv, write_json, write_samples_csv, write_sim_csv
from .simulators import available_simulators, get_simulator
from .transform.priors import is_uniform

log = logging.getLogger("lfikit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def output_root() -> Path:
    return Path(os.environ.get("LFIKIT_OUTPUT_ROOT", "runs"))


def _setup_logging(outdir: Path | None) -> None:
    handlers = [logging.StreamHandler(sys.stderr)]
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(outdir / "log.txt"))
    logging.basicConfig(level=logging.INFO, handlers=handlers, force=True,
                        format="%(asctime)s %(levelname)s %(message)s")


# -- run ---------------------------------------------------------------------


def persist_records(outdir: Path, experiment_id: str, sim, records) -> list:
    paths = []
    theta_cols = [f"theta{i+1}" for i in range(sim.theta_dim)]
    for rec in records:
        round_dir = outdir / f"round_{rec.round_index:02d}"
        samples_path = round_dir / "posterior_samples.csv"
        write_samples_csv(samples_path, rec.posterior_samples, theta_cols)
        paths.append(str(samples_path))
        if rec.params is not None:
            rec.params.save(round_dir / "params")
            paths.extend([str(round_dir / "params.bin"), str(round_dir / "params.json")])
        for metric, value in sorted(rec.metrics.items()):
            append_metric_record(outdir / "metrics.jsonl", experiment_id,
                                 rec.round_index, metric, value)
        if rec.acceptance_rate is not None:
            append_metric_record(outdir / "metrics.jsonl", experiment_id,
                                 rec.round_index, "acceptance_rate", rec.acceptance_rate)
        if rec.failure:
            append_metric_record(outdir / "metrics.jsonl", experiment_id,
                                 rec.round_index, "failed", 1.0)
            log.warning("round %d failed: %s", rec.round_index, rec.failure)
    paths.append(str(outdir / "metrics.jsonl"))
    return paths


def cmd_run(args) -> int:
    try:
        cfg, name, digest = load_config(args.config)
    except (ConfigurationError, yaml.YAMLError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(args.output) if args.output else output_root() / f"{name}-{digest}"
    _setup_logging(outdir)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    t0 = time.time()
    payload = yaml.safe_load(Path(args.config).read_text())
    (outdir / "config.resolved.yaml").write_text(
        yaml.safe_dump(_canonical(payload), sort_keys=True))
    try:
        sim = get_simulator(cfg.simulator, **cfg.simulator_options)
        log.info("running %s on %s (seed %d)", cfg.algorithm, cfg.simulator, cfg.seed)
        records, table = run_experiment(sim, cfg)
        paths = persist_records(outdir, name, sim, records)
        ok = not any(r.failure for r in records)
    except ConfigurationError as err:
        log.error("configuration error: %s", err)
        return EXIT_CONFIG
    except LfikitError as err:
        log.error("runtime error: %s", err)
        write_json(outdir / "manifest.json", {
            "experiment": name, "config_hash": digest, "seed": cfg.seed,
            "version": __version__, "started": started,
            "ended": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "status": "failed", "error": str(err), "artifacts": [],
        })
        return EXIT_RUNTIME
    write_json(outdir / "manifest.json", {
        "experiment": name, "config_hash": digest, "seed": cfg.seed,
        "version": __version__, "started": started,
        "ended": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "status": "ok" if ok else "partial",
        "duration_s": round(time.time() - t0, 3),
        "artifacts": paths,
    })
    log.info("finished %d rounds in %.1fs -> %s", len(records), time.time() - t0, outdir)
    return EXIT_OK


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    try:
        sim = get_simulator(args.simulator)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    rng_master = int(args.seed)
    if args.theta_file:
        thetas, _ = read_samples_csv(args.theta_file)
        if thetas.shape[1] != sim.theta_dim:
            print(f"error: theta file has {thetas.shape[1]} columns, "
                  f"expected {sim.theta_dim}", file=sys.stderr)
            return EXIT_CONFIG
        if is_uniform(sim.prior):
            bad = np.flatnonzero(~sim.prior.inside(thetas))
            if bad.size:
                print(f"error: rows outside prior support: {bad.tolist()}",
                      file=sys.stderr)
                return EXIT_CONFIG
    else:
        thetas = sim.prior.sample(rng_for(rng_master, "simulate", 0), args.n)
    seeds = [np.random.SeedSequence((rng_master, 1, j)) for j in range(thetas.shape[0])]
    xs = sim.simulate_batch(thetas, seeds)
    extra = None
    if args.loglik:
        if not sim.has_likelihood:
            print(f"error: {sim.name} has no analytic likelihood", file=sys.stderr)
            return EXIT_CONFIG
        extra = {"log_likelihood": np.array(
            [sim.log_likelihood(t, x) for t, x in zip(thetas, xs)])}
    out = Path(args.output)
    write_sim_csv(out, thetas, xs, extra=extra)
    write_json(out.with_suffix(".manifest.json"),
               {"name": sim.name, "seed": rng_master, "round": 0,
                "rows": int(thetas.shape[0]), "version": __version__})
    return EXIT_OK


# -- eval --------------------------------------------------------------------


def _oracle_samples(name: str, cache_dir):
    if name == "two_moons":
        grid = two_moons_reference_posterior()
        return grid.sample(rng_for(0, "eval", 42), 10_000)
    if name == "slcp":
        return slcp_reference_posterior(cache_dir=cache_dir)
    if name == "linear_gaussian":
        return linear_gaussian_reference()
    raise ConfigurationError(f"no reference posterior for {name!r}")


def cmd_eval(args) -> int:
    try:
        a, _ = read_samples_csv(args.samples_a)
        if args.samples_b:
            b, _ = read_samples_csv(args.samples_b)
        elif args.oracle:
            b = _oracle_samples(args.oracle, args.cache_dir)
        else:
            print("error: need a second samples file or --oracle", file=sys.stderr)
            return EXIT_CONFIG
        if a.shape[1] != b.shape[1]:
            print(f"error: dimension mismatch {a.shape[1]} vs {b.shape[1]}",
                  file=sys.stderr)
            return EXIT_CONFIG
        metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
        records = []
        for metric in metrics:
            if metric == "mmd":
                value = mmd(a, b, bandwidth=args.bandwidth)
            elif metric == "bandwidth":
                value = median_heuristic_bandwidth(np.concatenate([a, b]))
            elif metric == "nlp":
                from scipy.stats import gaussian_kde

                if args.oracle:
                    theta_star = get_simulator(args.oracle).theta_star
                elif args.theta_star:
                    theta_star = np.array([float(v) for v in args.theta_star.split(",")])
                else:
                    print("error: nlp needs --oracle or --theta-star", file=sys.stderr)
                    return EXIT_CONFIG
                value = float(-gaussian_kde(a.T).logpdf(theta_star)[0])
            else:
                print(f"error: unknown metric {metric!r}", file=sys.stderr)
                return EXIT_CONFIG
            records.append({"experiment-id": args.experiment_id, "round": 0,
                            "metric": metric, "value": float(value)})
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
            if args.output:
                append_metric_record(args.output, rec["experiment-id"], 0,
                                     rec["metric"], rec["value"])
    except (ConfigurationError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


# -- reproduce ---------------------------------------------------------------


def cmd_reproduce(args) -> int:
    from .reproduce import run_benchmark_matrix

    try:
        outdir = Path(args.output) if args.output else output_root() / f"reproduce-{args.figure}"
        _setup_logging(outdir)
        run_benchmark_matrix(args.figure, outdir, quick=args.quick,
                             rounds=args.rounds, sims=args.sims,
                             algorithms=(args.algorithms.split(",")
                                         if args.algorithms else None),
                             seed=args.seed)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except LfikitError as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


# -- list --------------------------------------------------------------------


def cmd_list(args) -> int:
    from .engine import ALGORITHMS

    print("simulators:")
    for name in available_simulators():
        print(f"  {name}")
    print("algorithms:")
    for name in ALGORITHMS:
        print(f"  {name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfikit",
        description="Simulation-based inference experiments: sequential "
                    "posterior estimation and baselines.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a YAML config")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="output directory "
                       "(default: $LFIKIT_OUTPUT_ROOT/<experiment>-<hash>)")
    p_run.set_defaults(func=cmd_run)

    p_sim = sub.add_parser("simulate", help="draw simulations to CSV")
    p_sim.add_argument("simulator")
    p_sim.add_argument("--n", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--theta-file", help="CSV of parameters instead of prior draws")
    p_sim.add_argument("--loglik", action="store_true",
                       help="append analytic log-likelihood column")
    p_sim.add_argument("--output", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("eval", help="compare posterior sample sets")
    p_eval.add_argument("samples_a")
    p_eval.add_argument("samples_b", nargs="?")
    p_eval.add_argument("--oracle", help="reference posterior name")
    p_eval.add_argument("--metrics", default="mmd")
    p_eval.add_argument("--bandwidth", type=float)
    p_eval.add_argument("--theta-star")
    p_eval.add_argument("--experiment-id", default="eval")
    p_eval.add_argument("--cache-dir", default=None)
    p_eval.add_argument("--output")
    p_eval.set_defaults(func=cmd_eval)

    p_rep = sub.add_parser("reproduce", help="run a benchmark's algorithm matrix")
    p_rep.add_argument("figure", choices=["two-moons", "slcp", "slcp-distractors",
                                          "lv", "mg1", "glm"])
    p_rep.add_argument("--output")
    p_rep.add_argument("--quick", action="store_true")
    p_rep.add_argument("--rounds", type=int)
    p_rep.add_argument("--sims", type=int)
    p_rep.add_argument("--algorithms")
    p_rep.add_argument("--seed", type=int, default=1)
    p_rep.set_defaults(func=cmd_reproduce)

    p_list = sub.add_parser("list", help="registered simulators and algorithms")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
