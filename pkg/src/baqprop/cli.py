"""Command line entry points: run / sweep / wigner / verify.

``run`` executes one experiment and writes a JSONL trace plus a summary;
``sweep`` runs a seed list (optionally in a process pool); ``wigner`` dumps
phase-space CSV snapshots of one kick/pulse cycle on a cubic potential;
``verify`` runs the invariant suite and exits nonzero on failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import RunConfig, parse_config_file
from .runtime import default_out_dir, summarize_sweep, write_summary, write_trace_jsonl

__all__ = ["main", "execute_run"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baqprop",
        description="Phase-kick training experiments on simulated continuous registers")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_experiment=True):
        if with_experiment:
            p.add_argument("experiment", nargs="?", default=None,
                           help="xor | maxcut | unitary | hybrid")
        p.add_argument("--optimizer", default=None,
                       help="momgrad | qdd | nelder-mead")
        p.add_argument("--seed", default=None,
                       help="seed (run) or comma-separated seed list (sweep)")
        p.add_argument("--iters", type=int, default=None)
        p.add_argument("--shots", type=int, default=None,
                       help="sample momenta with this many shots (default exact)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--config", default=None, help="key = value config file")

    add_common(sub.add_parser("run", help="run one experiment"))
    add_common(sub.add_parser("sweep", help="run a list of seeds"))
    wig = sub.add_parser("wigner", help="phase-space CSV snapshots (cubic potential)")
    wig.add_argument("--out", default=None)
    wig.add_argument("--config", default=None)
    sub.add_parser("verify", help="run the invariant suite")
    return parser


def _config_from_args(args, seed_override=None) -> RunConfig:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    if getattr(args, "experiment", None):
        values["experiment"] = args.experiment
    if args.optimizer:
        values["optimizer"] = args.optimizer
    if seed_override is not None:
        values["seed"] = int(seed_override)
    elif args.seed is not None:
        values["seed"] = int(str(args.seed).split(",")[0])
    if args.iters is not None:
        values["iterations"] = args.iters
    if args.shots is not None:
        values["shots"] = args.shots
    if args.out is not None:
        values["out"] = args.out
    return RunConfig(**values)


def execute_run(cfg: RunConfig):
    """Dispatch one configured run; returns (trace, result)."""
    kw = dict(iterations=cfg.resolved_iterations, eta=cfg.eta)
    if cfg.experiment == "xor":
        from .apps.xor import run_xor
        return run_xor(cfg.optimizer, cfg.seed, gamma=cfg.gamma, sigma=cfg.sigma,
                       shots=cfg.shots, **kw)
    if cfg.experiment == "maxcut":
        from .apps.maxcut import run_maxcut
        return run_maxcut(cfg.optimizer, cfg.seed, gamma=cfg.gamma,
                          sigma=cfg.sigma, shots=cfg.shots, **kw)
    if cfg.experiment == "unitary":
        from .apps.unitary import run_unitary_learning
        return run_unitary_learning(cfg.optimizer, cfg.seed, gamma=cfg.gamma,
                                    sigma=cfg.sigma, shots=cfg.shots, **kw)
    if cfg.experiment == "hybrid":
        from .apps.hybrid import run_hybrid
        return run_hybrid(cfg.seed, shots=cfg.shots, **kw)
    raise ValueError(f"unknown experiment {cfg.experiment!r}")


def _run_paths(cfg: RunConfig):
    out = cfg.out or default_out_dir()
    os.makedirs(out, exist_ok=True)
    stem = f"{cfg.experiment}_{cfg.optimizer}_seed{cfg.seed}"
    return os.path.join(out, stem + ".trace.jsonl"), os.path.join(out, stem + ".summary.json")


def _do_run(cfg: RunConfig) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        trace, result = execute_run(cfg)
    trace_path, summary_path = _run_paths(cfg)
    write_trace_jsonl(trace_path, trace)
    summary = {
        "experiment": cfg.experiment, "optimizer": cfg.optimizer,
        "seed": cfg.seed, "iterations": cfg.resolved_iterations,
        "shots": cfg.shots, "result": result,
        "final_metric": trace[-1]["metric"] if trace else None,
        "trace": os.path.basename(trace_path),
    }
    write_summary(summary_path, summary)
    print(f"wrote {trace_path}")
    print(f"wrote {summary_path}")
    return summary


def _sweep_worker(cfg_kwargs):
    import dataclasses
    cfg = RunConfig(**cfg_kwargs)
    return cfg.seed, _do_run(cfg)["final_metric"]


def _do_sweep(args) -> int:
    seeds = [int(s) for s in str(args.seed or "1").split(",") if s.strip()]
    base = _config_from_args(args, seed_override=seeds[0])
    jobs = []
    for s in seeds:
        from dataclasses import asdict
        kw = asdict(base)
        kw["seed"] = s
        jobs.append(kw)
    finals = {}
    if base.workers > 1:
        with ProcessPoolExecutor(max_workers=base.workers) as pool:
            for seed, metric in pool.map(_sweep_worker, jobs):
                finals[seed] = metric
    else:
        for kw in jobs:
            seed, metric = _sweep_worker(kw)
            finals[seed] = metric
    out = base.out or default_out_dir()
    stats = summarize_sweep(finals)
    path = os.path.join(out, f"{base.experiment}_{base.optimizer}_sweep.summary.json")
    write_summary(path, stats)
    print(f"wrote {path}")
    return 0


def _do_wigner(args) -> int:
    """Kick / (pulse | measure-reinit) / kick snapshots on J = x^3 + 2x."""
    from .hilbert import (GaussianPointer, QuditSpec, WaveState,
                          measure_momentum_expectation,
                          measure_position_expectation, prepare_gaussian)
    from .circuit import apply_diagonal_phase
    from .optim import kinetic_pulse
    from .wigner import wigner_discrete, write_wigner_csv

    out = args.out or default_out_dir()
    os.makedirs(out, exist_ok=True)
    spec = QuditSpec(63, -6.0, 6.0)
    eta, gamma = 0.1, 0.12
    cubic = spec.values**3 + 2.0 * spec.values
    k = np.arange(spec.d)
    half = spec.d // 2
    folded = ((k + half) % spec.d) - half
    pvals = np.sort(spec.momentum_unit * folded)

    def snap(state, name):
        w = wigner_discrete(state, "q0")
        # reorder momentum columns into the signed folded window
        order = np.argsort(((np.arange(spec.d) + half) % spec.d) - half)
        write_wigner_csv(os.path.join(out, name), w[:, order], spec.values, pvals)
        print(f"wrote {os.path.join(out, name)}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        init = prepare_gaussian(spec, GaussianPointer(0.0, 0.0, 1.0))
        snap(init, "wigner_initial.csv")

        qdd = WaveState(["q0"], [spec], init.psi.copy())
        apply_diagonal_phase(qdd, ["q0"], cubic, eta)
        snap(qdd, "wigner_qdd_kick.csv")
        kinetic_pulse(qdd, ["q0"], gamma)
        snap(qdd, "wigner_qdd_pulse.csv")
        apply_diagonal_phase(qdd, ["q0"], cubic, eta)
        snap(qdd, "wigner_qdd_kick2.csv")

        mom = WaveState(["q0"], [spec], init.psi.copy())
        apply_diagonal_phase(mom, ["q0"], cubic, eta)
        snap(mom, "wigner_momgrad_kick.csv")
        pi = measure_momentum_expectation(mom, ["q0"])[0]
        phi = measure_position_expectation(mom, ["q0"])[0]
        mom = prepare_gaussian(spec, GaussianPointer(phi + gamma * pi, pi, 1.0))
        snap(mom, "wigner_momgrad_reinit.csv")
        apply_diagonal_phase(mom, ["q0"], cubic, eta)
        snap(mom, "wigner_momgrad_kick2.csv")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "verify":
        from .checks import run_checks
        results = run_checks(verbose=True)
        failed = [r for r in results if not r.passed]
        print(f"\n{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0
    if args.command == "wigner":
        return _do_wigner(args)
    try:
        if args.command == "sweep":
            return _do_sweep(args)
        cfg = _config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _do_run(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
