"""Command-line interface.

Subcommands: simulate, loglik, estimate, limit-quantiles, ci, and
experiment {landscape|consistency|coverage}.  Experiment configuration comes
from a JSON file, individual flags override file entries.  Exit codes:
0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .errors import ConfigError, DegenerateModelError, NumericalError
from .experiments import (
    ExperimentConfig,
    run_consistency_study,
    run_coverage_study,
    run_likelihood_landscape,
)
from .inference import confidence_interval, local_time_estimator_calibrated
from .likelihood import LandscapeEvaluator, export_landscape
from .limit_law import limit_params, limit_quantiles, sample_argsup_batch
from .mle import argsup_mle
from .model import ModelParams
from .sampling import RngStream, export_path, import_path, simulate_path


def _emit(payload: dict, out_file=None) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if out_file:
        with open(out_file, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_path(args):
    sample, meta = import_path(args.path)
    alpha = args.alpha if args.alpha is not None else (meta or {}).get("alpha")
    beta = args.beta if args.beta is not None else (meta or {}).get("beta")
    if alpha is None or beta is None:
        raise ConfigError(
            "alpha/beta not given and not present in the path sidecar"
        )
    return sample, ModelParams(float(alpha), float(beta), args.rho0)


def _cmd_simulate(args):
    params = ModelParams(args.alpha, args.beta, args.rho)
    rng = RngStream(args.seed, args.stream_id)
    sample = simulate_path(params, args.n, args.x0, rng)
    export_path(sample, args.out, params=params, seed=args.seed, stream_id=args.stream_id)
    _emit({"out": args.out, "n": sample.n, "x0": sample.x0, "last": float(sample.values[-1])})


def _cmd_loglik(args):
    sample, params0 = _load_path(args)
    thetas = np.arange(args.theta_lo, args.theta_hi + 0.5 * args.theta_step, args.theta_step)
    values = LandscapeEvaluator(sample, params0).values(thetas)
    export_landscape(
        args.out,
        thetas,
        values,
        {
            "alpha": params0.alpha,
            "beta": params0.beta,
            "rho0": params0.rho,
            "n": sample.n,
            "source": str(args.path),
            "obmle": __version__,
        },
    )
    _emit({"out": args.out, "points": int(thetas.size)})


def _cmd_estimate(args):
    sample, params0 = _load_path(args)
    res = argsup_mle(sample, params0, window=(args.window_lo, args.window_hi),
                     grid_step=args.grid_step)
    _emit(
        {
            "rho_hat": res.rho_hat,
            "value": res.value,
            "attained_as_left_limit": res.attained_as_left_limit,
            "n": sample.n,
            "params": {"alpha": params0.alpha, "beta": params0.beta, "rho0": params0.rho},
        },
        args.out,
    )


def _cmd_limit_quantiles(args):
    p = limit_params(args.alpha, args.beta)
    rng = RngStream(args.seed, 0)
    if args.draws_csv:
        zs = sample_argsup_batch(p, 1.0, args.n_mc, rng, tail_tol=args.tail_tol)
        q_lo, q_hi = np.quantile(zs, [args.level / 2, 1 - args.level / 2])
        with open(args.draws_csv, "w") as fh:
            fh.write("z_star\n")
            for z in zs:
                fh.write(f"{z!r}\n")
    else:
        q_lo, q_hi = limit_quantiles(p, args.level, args.n_mc, rng, tail_tol=args.tail_tol)
    _emit(
        {"q_lo": float(q_lo), "q_hi": float(q_hi), "n_mc": args.n_mc, "tail_tol": args.tail_tol},
        args.out,
    )


def _cmd_ci(args):
    sample, params0 = _load_path(args)
    res = argsup_mle(sample, params0, window=(args.window_lo, args.window_hi),
                     grid_step=args.grid_step)
    l_cal = local_time_estimator_calibrated(
        sample, res.rho_hat, params0.alpha, params0.beta
    )
    p = limit_params(params0.alpha, params0.beta)
    q_lo, q_hi = limit_quantiles(
        p, args.level, args.n_mc, RngStream(args.seed, 0), tail_tol=args.tail_tol
    )
    report = confidence_interval(res.rho_hat, l_cal, sample.n, q_lo, q_hi, args.level)
    _emit(report.to_dict(), args.out)


def _cmd_experiment(args):
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for name in (
        "alpha",
        "beta",
        "rho0",
        "x0",
        "replications",
        "seed",
        "level",
        "output_dir",
        "jobs",
    ):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if args.n_values:
        overrides["n_values"] = [int(s) for s in args.n_values.split(",")]
    if overrides:
        cfg = ExperimentConfig(**{**asdict(cfg), **overrides})
    runner = {
        "landscape": run_likelihood_landscape,
        "consistency": run_consistency_study,
        "coverage": run_coverage_study,
    }[args.kind]
    summary = runner(cfg)
    _emit(summary)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="obmle", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a path by exact transitions")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stream-id", dest="stream_id", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_simulate)

    def add_path_args(p):
        p.add_argument("--path", required=True, help="path CSV (with JSON sidecar)")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--rho0", type=float, default=0.0)

    s = sub.add_parser("loglik", help="normalized log-likelihood over a theta grid")
    add_path_args(s)
    s.add_argument("--theta-lo", type=float, default=-1.0)
    s.add_argument("--theta-hi", type=float, default=1.0)
    s.add_argument("--theta-step", type=float, default=1e-4)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_loglik)

    s = sub.add_parser("estimate", help="argsup threshold estimate")
    add_path_args(s)
    s.add_argument("--window-lo", type=float, default=-1.0)
    s.add_argument("--window-hi", type=float, default=1.0)
    s.add_argument("--grid-step", type=float, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_estimate)

    s = sub.add_parser("limit-quantiles", help="limit-law argsup quantiles")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--level", type=float, default=0.1)
    s.add_argument("--n-mc", dest="n_mc", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-6)
    s.add_argument("--draws-csv", dest="draws_csv", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_limit_quantiles)

    s = sub.add_parser("ci", help="estimate + local time + quantiles + interval")
    add_path_args(s)
    s.add_argument("--window-lo", type=float, default=-1.0)
    s.add_argument("--window-hi", type=float, default=1.0)
    s.add_argument("--grid-step", type=float, default=None)
    s.add_argument("--level", type=float, default=0.1)
    s.add_argument("--n-mc", dest="n_mc", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-6)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_ci)

    s = sub.add_parser("experiment", help="Monte Carlo studies")
    s.add_argument("kind", choices=["landscape", "consistency", "coverage"])
    s.add_argument("--config", default=None, help="JSON config file")
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--rho0", type=float, default=None)
    s.add_argument("--x0", type=float, default=None)
    s.add_argument("--n-values", dest="n_values", default=None,
                   help="comma-separated grid sizes")
    s.add_argument("--replications", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--level", type=float, default=None)
    s.add_argument("--output-dir", dest="output_dir", default=None)
    s.add_argument("--jobs", type=int, default=None)
    s.set_defaults(fn=_cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, 0 on --help/--version
        return int(exc.code or 0)
    try:
        args.fn(args)
    except (ConfigError, DegenerateModelError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
