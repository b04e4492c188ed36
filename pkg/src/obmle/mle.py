"""Argsup maximum-likelihood estimate of the threshold.

The normalized log-likelihood is piecewise smooth in theta with breakpoints
exactly at the observed values shifted by the reference threshold; it jumps
only where the shifted threshold crosses a pair's end point.  The estimator
therefore maximizes each smooth restriction between consecutive breakpoints
(dense sub-grid plus golden-section refinement) and compares, at every
breakpoint, the value with the limit from below, following the convention
that a point attains the supremum if max(left limit, value) does.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .likelihood import LandscapeEvaluator
from .model import ModelParams
from .sampling import PathSample

__all__ = ["ArgsupResult", "ArgsupWindowWarning", "breakpoints", "argsup_mle"]


class ArgsupWindowWarning(UserWarning):
    """The likelihood at the search-window edge competes with the interior max."""


@dataclass
class ArgsupResult:
    rho_hat: float
    value: float
    attained_as_left_limit: bool
    candidates_examined: int
    ties: list = field(default_factory=list)


def breakpoints(path: PathSample, rho0: float, window) -> np.ndarray:
    """Sorted distinct candidate discontinuity/kink abscissae in theta.

    Observed values shifted by rho0 and inside the window, plus the window
    endpoints and 0.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ValueError(f"window must be a bounded interval, got {window!r}")
    shifted = path.values - rho0
    inside = shifted[(shifted >= lo) & (shifted <= hi)]
    return np.unique(np.concatenate((inside, [lo, hi, 0.0])))


def _golden_max_batch(ev: LandscapeEvaluator, los, his, xatol: float = 1e-12):
    """Golden-section maximization over many brackets at once.

    Each iteration evaluates one new probe point per bracket through the
    landscape evaluator; endpoints are never evaluated.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.asarray(los, dtype=float).copy()
    b = np.asarray(his, dtype=float).copy()
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = ev.values(c, block=128)
    fd = ev.values(d, block=128)
    while np.max(b - a) > xatol:
        left = fc >= fd
        a_new = np.where(left, a, c)
        b_new = np.where(left, d, b)
        c_new = np.where(left, b_new - invphi * (b_new - a_new), d)
        d_new = np.where(left, c, a_new + invphi * (b_new - a_new))
        probe = np.where(left, c_new, d_new)
        fprobe = ev.values(probe, block=128)
        fc_new = np.where(left, fprobe, fd)
        fd_new = np.where(left, fc, fprobe)
        a, b, c, d, fc, fd = a_new, b_new, c_new, d_new, fc_new, fd_new
    pickc = fc >= fd
    return np.where(pickc, c, d), np.where(pickc, fc, fd)


def argsup_mle(
    path: PathSample,
    params0: ModelParams,
    window=(-1.0, 1.0),
    grid_step: float | None = None,
) -> ArgsupResult:
    """Global argsup of ell_n over the window, with the left-limit convention.

    grid_step defaults to 1/(100 n) and must be <= 0.1/n.  Ties (exactly
    equal candidate values) are broken by smallest |theta|, then smallest
    theta, so the flat alpha == beta landscape returns the reference
    threshold itself.
    """
    n = path.n
    if grid_step is None:
        grid_step = 1.0 / (100.0 * n)
    if grid_step <= 0 or grid_step > 0.1 / n:
        raise ValueError(f"grid_step must be in (0, 0.1/n]; got {grid_step}")
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ValueError(f"window must be a bounded interval, got {window!r}")

    breaks = breakpoints(path, params0.rho, (lo, hi))
    breaks = breaks[(breaks >= lo) & (breaks <= hi)]
    ev = LandscapeEvaluator(path, params0)

    grid = np.arange(lo, hi + 0.5 * grid_step, grid_step)
    positions = np.unique(np.concatenate((grid, breaks)))
    vals = ev.values(positions)

    # candidate pool: (theta, value, is_left_limit)
    cand_theta = [positions]
    cand_value = [vals]
    cand_isll = [np.zeros(positions.size, dtype=bool)]

    left_vals = ev.values(breaks, convention="left", block=256)
    cand_theta.append(breaks)
    cand_value.append(left_vals)
    cand_isll.append(np.ones(breaks.size, dtype=bool))

    # interior smooth maxima: bracket strict local maxima of the sub-grid
    # whose neighbors lie in the same inter-breakpoint interval
    iv = np.searchsorted(breaks, positions, side="right")
    is_break = np.isin(positions, breaks)
    interior = np.nonzero(
        ~is_break[1:-1]
        & (vals[1:-1] > vals[:-2])
        & (vals[1:-1] > vals[2:])
        & (iv[1:-1] == iv[:-2])
        & (iv[1:-1] == iv[2:])
    )[0]
    if interior.size:
        j = interior + 1
        refine_theta, refine_value = _golden_max_batch(
            ev, positions[j - 1], positions[j + 1]
        )
        cand_theta.append(refine_theta)
        cand_value.append(refine_value)
        cand_isll.append(np.zeros(refine_theta.size, dtype=bool))

    thetas = np.concatenate(cand_theta)
    values = np.concatenate(cand_value)
    isll = np.concatenate(cand_isll)

    best = float(np.max(values))
    at_best = values == best
    tie_thetas = np.unique(thetas[at_best])
    pick = tie_thetas[np.lexsort((tie_thetas, np.abs(tie_thetas)))][0]
    chosen = at_best & (thetas == pick)
    # if both a value and a left limit attain the max at the same theta,
    # report attainment as a plain value
    attained_ll = bool(np.all(isll[chosen]))

    edge_vals = ev.values(np.array([lo, hi]))
    if best - float(np.max(edge_vals)) <= 1e-9:
        warnings.warn(
            "likelihood at the window edge is within margin of the interior "
            "maximum; consider enlarging the search window",
            ArgsupWindowWarning,
            stacklevel=2,
        )

    return ArgsupResult(
        rho_hat=params0.rho + float(pick),
        value=best,
        attained_as_left_limit=attained_ll,
        candidates_examined=int(thetas.size),
        ties=[float(v) for v in tie_thetas],
    )
