"""Monte Carlo harness: landscape, consistency and coverage studies.

Every study is a deterministic function of (config, seed): replication r
uses the stream (seed, r), aggregation is by ascending replication index,
and each CSV output gets a JSON sidecar carrying the full config, a config
hash and library versions.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__ as _pkg_version
from .errors import ConfigError
from .inference import (
    confidence_interval,
    local_time_estimator,
    local_time_estimator_calibrated,
)
from .likelihood import LandscapeEvaluator, drift_constants, export_landscape
from .limit_law import limit_params, limit_quantiles
from .mle import ArgsupWindowWarning, argsup_mle
from .model import ModelParams
from .sampling import RngStream, simulate_path

__all__ = [
    "ExperimentConfig",
    "run_likelihood_landscape",
    "run_consistency_study",
    "run_coverage_study",
]

# replications with (calibrated) local-time estimate at or below this are
# reported but excluded from conditioned summaries
LOCAL_TIME_CUTOFF = 0.1

_QUANTILE_STREAM_ID = 10**9
_Z_GRID_HALF_WIDTH = 20.0
_Z_GRID_STEP = 0.1


@dataclass
class ExperimentConfig:
    alpha: float = 0.5
    beta: float = 0.2
    rho0: float = 0.0
    x0: float = 0.0
    n_values: list = field(default_factory=lambda: [1000])
    replications: int = 50
    seed: int = 20_240
    level: float = 0.1
    output_dir: str = "."
    theta_grid: tuple = (-1.0, 1.0, 1e-6)
    window: tuple = (-1.0, 1.0)
    grid_step_factor: float = 0.1  # argsup sub-grid step = factor / n
    n_quantile_draws: int = 100_000
    jobs: int = 1
    full_grid_paths: int = 1  # per-path CSVs on the full theta grid

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.n_values:
            raise ConfigError("n_values must be nonempty")
        if any(int(n) < 1 for n in self.n_values):
            raise ConfigError("all n_values must be >= 1")
        if len(self.theta_grid) != 3 or self.theta_grid[2] <= 0:
            raise ConfigError("theta_grid must be (lo, hi, step) with step > 0")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must be in (0, 1)")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("alpha and beta must be positive")
        if not 0.0 < self.grid_step_factor <= 0.1:
            raise ConfigError("grid_step_factor must be in (0, 0.1]")
        self.n_values = [int(n) for n in self.n_values]

    @classmethod
    def from_json(cls, file) -> "ExperimentConfig":
        with open(file) as fh:
            data = json.load(fh)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad config file {file}: {exc}") from None

    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.beta, self.rho0)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def sidecar(self, **extra) -> dict:
        return {
            "config": asdict(self),
            "config_hash": self.config_hash(),
            "versions": {
                "obmle": _pkg_version,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            **extra,
        }


def _write_csv(file, header, rows) -> None:
    with Path(file).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(file, payload) -> None:
    with Path(file).open("w") as fh:
        json.dump(payload, fh, indent=2, default=str)


def _one_replication(args):
    """Simulate one path and estimate.

    Returns (r, rho_hat, L_raw, L_cal, hit_window_edge); the raw crossing
    count drives the conditioning cutoff, the calibrated value feeds the CI.
    """
    cfg_dict, n, r = args
    cfg = ExperimentConfig(**cfg_dict)
    params = cfg.params()
    rng = RngStream(cfg.seed, r)
    path = simulate_path(params, n, cfg.x0, rng)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = argsup_mle(
            path, params, window=cfg.window, grid_step=cfg.grid_step_factor / n
        )
    edge = any(issubclass(w.category, ArgsupWindowWarning) for w in caught)
    l_raw = local_time_estimator(path, res.rho_hat)
    l_cal = local_time_estimator_calibrated(path, res.rho_hat, cfg.alpha, cfg.beta)
    return r, res.rho_hat, l_raw, l_cal, edge


def _run_replications(cfg: ExperimentConfig, n: int, rep_offset: int = 0):
    """All replications for one n, deterministic order, optional processes."""
    tasks = [(asdict(cfg), n, rep_offset + r) for r in range(cfg.replications)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_one_replication, tasks, chunksize=8))
    else:
        results = [_one_replication(t) for t in tasks]
    results.sort(key=lambda t: t[0])
    return results


def run_likelihood_landscape(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Per-path landscapes plus the averaged landscape on the z = n*theta scale.

    Writes z-scale CSVs for every path, the full theta-grid CSV for the first
    cfg.full_grid_paths paths, and the average landscape with a fitted
    slope-per-side summary.
    """
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.params()
    n = cfg.n_values[0]
    z_grid = np.arange(-_Z_GRID_HALF_WIDTH, _Z_GRID_HALF_WIDTH + 1e-9, _Z_GRID_STEP)
    theta_z = z_grid / n
    lo, hi, step = cfg.theta_grid
    acc = np.zeros_like(theta_z)
    l_values = []
    for r in range(cfg.replications):
        rng = RngStream(cfg.seed, r)
        path = simulate_path(params, n, cfg.x0, rng)
        ev = LandscapeEvaluator(path, params)
        vals_z = ev.values(theta_z)
        acc += vals_z
        l_values.append(
            local_time_estimator_calibrated(path, cfg.rho0, cfg.alpha, cfg.beta)
        )
        export_landscape(
            out / f"landscape_z_rep{r:04d}.csv",
            theta_z,
            vals_z,
            cfg.sidecar(replication=r, n=n, grid="z", z_step=_Z_GRID_STEP),
        )
        if r < cfg.full_grid_paths:
            thetas = np.arange(lo, hi + 0.5 * step, step)
            export_landscape(
                out / f"landscape_theta_rep{r:04d}.csv",
                thetas,
                ev.values(thetas),
                cfg.sidecar(replication=r, n=n, grid="theta"),
            )
    avg = acc / cfg.replications
    export_landscape(
        out / "landscape_z_average.csv",
        theta_z,
        avg,
        cfg.sidecar(n=n, grid="z", averaged_over=cfg.replications),
    )
    dc = drift_constants(cfg.alpha, cfg.beta)
    l_mean = float(np.mean(l_values))
    pos = z_grid > 0
    neg = z_grid < 0
    slope_pos = float(np.dot(z_grid[pos], avg[pos]) / np.dot(z_grid[pos], z_grid[pos]))
    slope_neg_abs = float(
        np.dot(-z_grid[neg], avg[neg]) / np.dot(z_grid[neg], z_grid[neg])
    )
    summary = cfg.sidecar(
        n=n,
        local_time_mean=l_mean,
        slope_pos_fit=slope_pos,
        slope_neg_fit=slope_neg_abs,
        slope_pos_target=dc.b * l_mean,
        slope_neg_target=dc.b_prime * l_mean,
    )
    _write_json(out / "landscape_summary.json", summary)
    return summary


def run_consistency_study(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Quantiles of n|rho_hat - rho0| per n, conditioned on local time > cutoff."""
    if len(cfg.n_values) < 3:
        raise ConfigError("consistency study needs at least 3 entries in n_values")
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    table = []
    for n in cfg.n_values:
        res = _run_replications(cfg, n)
        err = np.array([abs(rho - cfg.rho0) for _, rho, _, _, _ in res])
        l_raw = np.array([lr for _, _, lr, _, _ in res])
        kept = l_raw > LOCAL_TIME_CUTOFF
        scaled = n * err[kept]
        q50, q90 = (
            (float(np.quantile(scaled, 0.5)), float(np.quantile(scaled, 0.9)))
            if kept.any()
            else (math.nan, math.nan)
        )
        med_raw = float(np.quantile(err[kept], 0.5)) if kept.any() else math.nan
        n_edge = sum(int(e) for _, _, _, _, e in res)
        rows.append([n, int(kept.sum()), cfg.replications, q50, q90, med_raw, n_edge])
        table.append(
            {
                "n": n,
                "kept": int(kept.sum()),
                "replications": cfg.replications,
                "q50_scaled": q50,
                "q90_scaled": q90,
                "median_abs_error": med_raw,
                "window_edge_warnings": n_edge,
            }
        )
    _write_csv(
        out / "consistency.csv",
        [
            "n",
            "kept",
            "replications",
            "q50_scaled",
            "q90_scaled",
            "median_abs_error",
            "window_edge_warnings",
        ],
        rows,
    )
    summary = cfg.sidecar(table=table)
    _write_json(out / "consistency.json", summary)
    return summary


def _wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def run_coverage_study(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Empirical CI coverage of rho0 per n, conditioned on local time > cutoff."""
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = limit_params(cfg.alpha, cfg.beta)
    q_lo, q_hi = limit_quantiles(
        p,
        cfg.level,
        cfg.n_quantile_draws,
        RngStream(cfg.seed, _QUANTILE_STREAM_ID),
    )
    rows = []
    table = []
    for n in cfg.n_values:
        res = _run_replications(cfg, n)
        hits = 0
        kept = 0
        for _, rho_hat, l_raw, l_cal, _ in res:
            if l_raw <= LOCAL_TIME_CUTOFF:
                continue
            kept += 1
            rep = confidence_interval(rho_hat, l_cal, n, q_lo, q_hi, cfg.level)
            if rep.ci_lo <= cfg.rho0 <= rep.ci_hi:
                hits += 1
        cov = hits / kept if kept else math.nan
        w_lo, w_hi = _wilson_interval(hits, kept)
        rows.append([n, kept, cfg.replications, cov, w_lo, w_hi])
        table.append(
            {
                "n": n,
                "kept": kept,
                "replications": cfg.replications,
                "coverage": cov,
                "wilson_lo": w_lo,
                "wilson_hi": w_hi,
            }
        )
    _write_csv(
        out / "coverage.csv",
        ["n", "kept", "replications", "coverage", "wilson_lo", "wilson_hi"],
        rows,
    )
    summary = cfg.sidecar(table=table, q_lo=q_lo, q_hi=q_hi, level=cfg.level)
    _write_json(out / "coverage.json", summary)
    return summary
