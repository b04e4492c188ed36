"""Two-sided compensated-Poisson limit process and its exact argsup.

For volatilities alpha != beta the rescaled threshold-estimation error
converges to the argsup of

    ell(z) = slope_pos*z + jump_pos*N(z/beta^2)            for z >= 0,
    ell(z) = slope_neg*|z| + jump_neg*N'((-z/alpha^2)-)    for z < 0,

a piecewise-linear path with i.i.d. exponential jump spacings.  Its supremum
over each side is attained only at z = 0, at jump abscissae, or as limits
from below at jump abscissae, so the argsup is computed exactly from that
finite candidate set.  The truncation horizon is extended until an
optional-stopping (Chernoff/Doob) bound certifies that the supremum beyond
the horizon exceeds the current maximum with probability below ``tail_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateModelError, NumericalError
from .sampling import RngStream

__all__ = [
    "LimitLawParams",
    "LimitArgsupSample",
    "limit_params",
    "sample_limit_argsup",
    "sample_argsup_batch",
    "limit_quantiles",
    "sample_limit_path",
]


@dataclass(frozen=True)
class LimitLawParams:
    """Drift slopes, jump sizes and jump rates of the limit process."""

    slope_pos: float
    slope_neg: float
    jump_pos: float
    jump_neg: float
    rate_pos: float
    rate_neg: float

    @property
    def b(self) -> float:
        """Compensated drift on z >= 0: slope_pos + jump_pos * rate_pos."""
        return self.slope_pos + self.jump_pos * self.rate_pos

    @property
    def b_prime(self) -> float:
        """Compensated drift on z < 0: slope_neg + jump_neg * rate_neg."""
        return self.slope_neg + self.jump_neg * self.rate_neg


@dataclass(frozen=True)
class LimitArgsupSample:
    z_star: float
    value: float
    truncation_horizon: float
    tail_bound: float


def limit_params(alpha: float, beta: float) -> LimitLawParams:
    """Limit-process coefficients for volatilities (alpha, beta), alpha != beta."""
    a, b = float(alpha), float(beta)
    if a <= 0 or b <= 0:
        raise ValueError("alpha and beta must be positive")
    if a == b:
        raise DegenerateModelError(
            "alpha == beta: the limit process is identically zero"
        )
    log_ba = math.log(b * b / (a * a))
    return LimitLawParams(
        slope_pos=(a * a - b * b) / (a * a * b * b),
        slope_neg=(b * b - a * a) / (a * a * b * b),
        jump_pos=log_ba,
        jump_neg=-log_ba,
        rate_pos=1.0 / (b * b),
        rate_neg=1.0 / (a * a),
    )


class _JumpBuffer:
    """Incrementally simulated Poisson jump abscissae at a fixed rate."""

    def __init__(self, rng: RngStream, rate: float):
        self.gen = rng.generator()
        self.rate = float(rate)
        self.times = np.empty(0, dtype=float)
        self.last = 0.0

    def extend_to(self, horizon: float) -> None:
        while self.last <= horizon:
            gaps = self.gen.exponential(1.0 / self.rate, size=64)
            new = self.last + np.cumsum(gaps)
            self.times = np.concatenate((self.times, new))
            self.last = float(new[-1])

    def upto(self, horizon: float) -> np.ndarray:
        i = np.searchsorted(self.times, horizon, side="right")
        return self.times[:i]


def _tail_exponent(jump: float, delta: float) -> float:
    """Largest u with psi(sign(jump)*u) <= u*delta; inf if the barrier is unreachable."""
    if jump > 0:
        # upward deviations of the compensated Poisson process
        fn = lambda u: math.exp(u) - 1.0 - u * (1.0 + delta)
        hi = 1.0
        while fn(hi) < 0:
            hi *= 2.0
        return brentq(fn, 1e-12, hi, xtol=1e-12)
    # downward deviations: -(N(s)-s) <= s makes slopes delta >= 1 unreachable
    if delta >= 1.0:
        return math.inf
    fn = lambda u: math.exp(-u) - 1.0 + u * (1.0 - delta)
    hi = 1.0
    while fn(hi) < 0:
        hi *= 2.0
    return brentq(fn, 1e-12, hi, xtol=1e-12)


def _side_tail_bound(gap: float, jump: float, delta: float) -> float:
    """Bound on P(sup of compensated side-process beyond the horizon >= gap)."""
    if gap <= 0.0:
        return 1.0
    u = _tail_exponent(jump, delta)
    if math.isinf(u):
        return 0.0
    return math.exp(-u * gap / abs(jump))


def _side_candidates(slope_L: float, jump: float, times: np.ndarray, negative: bool):
    """Candidate (z, value, left limit) triples at the jump abscissae of one side."""
    if times.size == 0:
        empty = np.empty(0)
        return empty, empty, empty
    i = np.arange(1, times.size + 1, dtype=float)
    ramp = slope_L * times
    if not negative:
        at = ramp + jump * i        # cadlag: the jump is included at the point
        ll = at - jump
        z = times
    else:
        ll = ramp + jump * i        # limit from below in z includes the jump
        at = ll - jump
        z = -times
    return z, at, ll


def _argsup_over_candidates(p: LimitLawParams, L: float, pos_times, neg_times):
    """Exact argsup over {0} and both jump-candidate sets (value or left limit)."""
    zp, atp, llp = _side_candidates(p.slope_pos * L, p.jump_pos, np.asarray(pos_times, float), False)
    zn, atn, lln = _side_candidates(p.slope_neg * L, p.jump_neg, np.asarray(neg_times, float), True)
    zs = np.concatenate(([0.0], zp, zp, zn, zn))
    vals = np.concatenate(([0.0], atp, llp, atn, lln))
    isll = np.concatenate(
        (
            [False],
            np.zeros(zp.size, bool),
            np.ones(zp.size, bool),
            np.zeros(zn.size, bool),
            np.ones(zn.size, bool),
        )
    )
    best = float(np.max(vals))
    at_best = vals == best
    tied = zs[at_best]
    pick = tied[np.lexsort((tied, np.abs(tied)))][0]
    chosen = at_best & (zs == pick)
    return float(pick), best, bool(np.all(isll[chosen]))


def sample_limit_argsup(
    p: LimitLawParams,
    L: float,
    rng: RngStream,
    tail_tol: float = 1e-6,
    max_horizon: float = 1e7,
) -> LimitArgsupSample:
    """One exact draw of argsup_z ell(z*L) with a certified truncation bound."""
    if not 0.0 < tail_tol <= 0.01:
        raise ValueError("tail_tol must be in (0, 0.01]")
    if L <= 0:
        raise ValueError("L must be positive")
    rate_pos_z = L * p.rate_pos
    rate_neg_z = L * p.rate_neg
    delta_pos = abs(p.b) / (abs(p.jump_pos) * p.rate_pos)
    delta_neg = abs(p.b_prime) / (abs(p.jump_neg) * p.rate_neg)
    pos = _JumpBuffer(rng.child(0), rate_pos_z)
    neg = _JumpBuffer(rng.child(1), rate_neg_z)
    h_pos = 50.0 / rate_pos_z
    h_neg = 50.0 / rate_neg_z
    while True:
        pos.extend_to(h_pos)
        neg.extend_to(h_neg)
        tp = pos.upto(h_pos)
        tn = neg.upto(h_neg)
        z_star, value, isll = _argsup_over_candidates(p, L, tp, tn)
        edge_pos = p.slope_pos * L * h_pos + p.jump_pos * tp.size
        edge_neg = p.slope_neg * L * h_neg + p.jump_neg * tn.size
        tail = _side_tail_bound(value - edge_pos, p.jump_pos, delta_pos) + _side_tail_bound(
            value - edge_neg, p.jump_neg, delta_neg
        )
        if tail < tail_tol:
            return LimitArgsupSample(
                z_star=z_star,
                value=value,
                truncation_horizon=max(h_pos, h_neg),
                tail_bound=tail,
            )
        h_pos *= 2.0
        h_neg *= 2.0
        if max(h_pos, h_neg) > max_horizon:
            raise NumericalError(
                f"truncation horizon exceeded {max_horizon} without certifying "
                f"tail bound {tail_tol}"
            )


def sample_argsup_batch(
    p: LimitLawParams,
    L: float,
    size: int,
    rng: RngStream,
    tail_tol: float = 1e-6,
) -> np.ndarray:
    """Independent argsup draws, one derived substream per draw."""
    out = np.empty(size, dtype=float)
    for i in range(size):
        out[i] = sample_limit_argsup(p, L, rng.child(2, i), tail_tol=tail_tol).z_star
    return out


def limit_quantiles(
    p: LimitLawParams,
    level: float,
    n_mc: int,
    rng: RngStream,
    tail_tol: float = 1e-6,
):
    """Empirical (level/2, 1-level/2) quantiles of argsup_z ell(z) from n_mc draws."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if n_mc < 1000:
        raise ValueError("n_mc must be >= 1000")
    zs = sample_argsup_batch(p, 1.0, n_mc, rng, tail_tol=tail_tol)
    q_lo, q_hi = np.quantile(zs, [level / 2.0, 1.0 - level / 2.0])
    return float(q_lo), float(q_hi)


def sample_limit_path(
    p: LimitLawParams,
    L: float,
    z_grid,
    rng: RngStream | None = None,
    jumps=None,
) -> np.ndarray:
    """ell(z*L) on a grid: cadlag on z >= 0, left-continuous jump count on z < 0.

    ``jumps=(pos_abscissae, neg_abscissae)`` reuses a fixed realization
    (both given as positive z magnitudes); otherwise the jumps are drawn from
    the same substreams sample_limit_argsup would use, so equal RngStream
    identities share the realization.
    """
    z = np.asarray(z_grid, dtype=float)
    if L <= 0:
        raise ValueError("L must be positive")
    h_pos = max(float(np.max(z, initial=0.0)), 0.0)
    h_neg = max(float(-np.min(z, initial=0.0)), 0.0)
    if jumps is not None:
        tp = np.sort(np.asarray(jumps[0], dtype=float))
        tn = np.sort(np.asarray(jumps[1], dtype=float))
    else:
        if rng is None:
            raise ValueError("either rng or jumps must be given")
        pos = _JumpBuffer(rng.child(0), L * p.rate_pos)
        neg = _JumpBuffer(rng.child(1), L * p.rate_neg)
        pos.extend_to(h_pos)
        neg.extend_to(h_neg)
        tp = pos.upto(h_pos)
        tn = neg.upto(h_neg)
    out = np.empty_like(z)
    nonneg = z >= 0.0
    counts = np.searchsorted(tp, z[nonneg], side="right")
    out[nonneg] = p.slope_pos * L * z[nonneg] + p.jump_pos * counts
    u = -z[~nonneg]
    counts = np.searchsorted(tn, u, side="left")  # strictly-before convention
    out[~nonneg] = p.slope_neg * L * u + p.jump_neg * counts
    return out
