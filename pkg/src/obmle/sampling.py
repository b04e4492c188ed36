"""Exact simulation of discretely observed paths.

Transitions are drawn exactly from the closed-form density by rejection
against the Gaussian envelope; no time-discretization bias.  Randomness comes
from counter-based Philox streams keyed by (seed, stream_id), so distinct
stream ids give independent, reproducible streams.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import NumericalError
from .model import ModelParams, envelope, transition_density

__all__ = [
    "RngStream",
    "PathSample",
    "sample_transition",
    "simulate_path",
    "export_path",
    "import_path",
]

_PROPOSAL_BLOCK = 8
_DEFAULT_PROPOSAL_CAP = 1_000_000


@dataclass
class RngStream:
    """Reproducible random stream.

    Identical (seed, stream_id) always yields the identical draw sequence;
    distinct stream_ids are statistically independent.  ``spawn_path`` keys
    derived substreams (used internally, e.g. one stream per side of the
    limit process).
    """

    seed: int
    stream_id: int = 0
    spawn_path: tuple = ()
    _gen: Optional[np.random.Generator] = field(
        default=None, repr=False, compare=False
    )

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(
                entropy=int(self.seed),
                spawn_key=(int(self.stream_id),) + tuple(self.spawn_path),
            )
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def child(self, *tags: int) -> "RngStream":
        """Independent substream derived from this stream's identity."""
        return RngStream(self.seed, self.stream_id, self.spawn_path + tuple(tags))


@dataclass
class PathSample:
    """A path observed on the grid 0, 1/n, ..., 1."""

    n: int
    x0: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.values.shape != (self.n + 1,):
            raise ValueError(
                f"values must have length n+1={self.n + 1}, got {self.values.shape}"
            )
        if self.values[0] != self.x0:
            raise ValueError("values[0] must equal x0")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def _rejection_sample(
    params: ModelParams,
    t: float,
    x: float,
    rng: RngStream,
    max_proposals: int = _DEFAULT_PROPOSAL_CAP,
):
    """One exact draw by envelope rejection; returns (value, proposals used)."""
    env = envelope(params, t, x)
    gen = rng.generator()
    c_env = env.scale_constant
    used = 0
    while used < max_proposals:
        ys = gen.normal(env.mean, env.std, size=_PROPOSAL_BLOCK)
        us = gen.uniform(size=_PROPOSAL_BLOCK)
        ratio = transition_density(params, t, x, ys) / (c_env * env.pdf(ys))
        hits = np.nonzero(us < ratio)[0]
        if hits.size:
            return float(ys[hits[0]]), used + int(hits[0]) + 1
        used += _PROPOSAL_BLOCK
    raise NumericalError(
        f"rejection sampler exceeded {max_proposals} proposals at x={x}, t={t}; "
        "this indicates an envelope or density bug"
    )


def sample_transition(params: ModelParams, t: float, x: float, rng: RngStream) -> float:
    """Exact draw from the transition law over time t started at x."""
    if t <= 0:
        raise ValueError("t must be positive")
    value, _ = _rejection_sample(params, t, x, rng)
    return value


def simulate_path(params: ModelParams, n: int, x0: float, rng: RngStream) -> PathSample:
    """Markov chain of n exact transitions with step 1/n starting at x0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = 1.0 / n
    values = np.empty(n + 1, dtype=float)
    values[0] = x0
    x = float(x0)
    for k in range(1, n + 1):
        x = sample_transition(params, t, x, rng)
        values[k] = x
    return PathSample(n=n, x0=float(x0), values=values)


# ---------------------------------------------------------------------------
# Path export / import: CSV with header k,x plus a JSON sidecar.
# ---------------------------------------------------------------------------


def _sidecar_name(csv_file) -> Path:
    p = Path(csv_file)
    return p.with_suffix(".json")


def export_path(
    sample: PathSample,
    csv_file,
    params: Optional[ModelParams] = None,
    seed: Optional[int] = None,
    stream_id: Optional[int] = None,
) -> None:
    """Write the observation vector as CSV `k,x` and a JSON sidecar."""
    p = Path(csv_file)
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "x"])
        for k, v in enumerate(sample.values):
            w.writerow([k, repr(float(v))])
    meta = {
        "n": sample.n,
        "x0": sample.x0,
        "alpha": params.alpha if params else None,
        "beta": params.beta if params else None,
        "rho": params.rho if params else None,
        "seed": seed,
        "stream_id": stream_id,
    }
    with _sidecar_name(p).open("w") as fh:
        json.dump(meta, fh, indent=2)


def import_path(csv_file):
    """Read a path CSV (and sidecar if present) back to (PathSample, meta)."""
    p = Path(csv_file)
    ks, xs = [], []
    with p.open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if [h.strip() for h in header] != ["k", "x"]:
            raise ValueError(f"unexpected CSV header {header!r}, expected ['k','x']")
        for row in r:
            ks.append(int(row[0]))
            xs.append(float(row[1]))
    if ks != list(range(len(ks))):
        raise ValueError("CSV rows must be k=0..n in order")
    values = np.asarray(xs, dtype=float)
    sample = PathSample(n=len(values) - 1, x0=float(values[0]), values=values)
    meta = None
    side = _sidecar_name(p)
    if side.exists():
        with side.open() as fh:
            meta = json.load(fh)
        if meta.get("n") is not None and int(meta["n"]) != sample.n:
            raise ValueError("sidecar n does not match CSV length")
    return sample, meta


def quadratic_variation(sample: PathSample) -> float:
    """Sum of squared increments; equals about 1 for unit-volatility paths."""
    inc = sample.increments
    return float(np.dot(inc, inc))


def _check_finite_scalar(v: float, name: str) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite")
    return v
