"""Normalized log-likelihood of the threshold parameter and its structure.

For a candidate shift ``theta`` of the threshold away from the reference
``rho0``, the normalized log-likelihood is

    ell_n(theta) = sum_k [ log p^(rho0+theta) - log p^(rho0) ](X_{(k-1)/n}, X_{k/n})

with step 1/n.  Each observation pair falls into one of nine disjoint regimes
determined by its position relative to the two thresholds; the sum splits
accordingly.  This module provides the definitional evaluation, the
nine-regime decomposition, the sequential (partial-sum) version, the drift
term by quadrature, the explicit drift constants, and a fast evaluator for
whole landscapes of ``theta`` values.

The landscape evaluator exploits that a pair's contribution depends on theta
only while ``rho0+theta`` is near the pair: outside a small support the
contribution is a constant, handled by prefix sums.  The decomposition is
algebraically exact up to dropped reflection corrections below exp(-46),
i.e. ~1e-20 per pair.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError
from .model import ModelParams, log_transition_density, transition_density
from .sampling import PathSample

__all__ = [
    "PairRegime",
    "DriftConstants",
    "LikelihoodLandscape",
    "classify_pair",
    "ell_n",
    "regime_sums",
    "ell_n_sequential",
    "drift_constants",
    "lambda_n_statistic",
    "drift_numeric",
    "gaussian_kernel_pair",
    "indicator_window",
    "LandscapeEvaluator",
    "export_landscape",
]

# reflection corrections smaller than exp(-_Q_CUT) are dropped by the
# landscape evaluator (well below double rounding of O(1) terms)
_Q_CUT = 46.0


@dataclass(frozen=True)
class PairRegime:
    """One of the nine disjoint pair classifications."""

    index: int

    def __post_init__(self):
        if self.index not in range(1, 10):
            raise ValueError("pair regime index must be in 1..9")


@dataclass(frozen=True)
class DriftConstants:
    """Explicit constants of the small-theta drift expansion and limit drift."""

    F: float
    F_tilde: float
    b: float
    b_prime: float
    lambda_f: float


@dataclass
class LikelihoodLandscape:
    """ell_n evaluated over a theta grid, with breakpoint metadata."""

    thetas: np.ndarray
    values: np.ndarray
    breakpoints: np.ndarray
    left_limits: dict


def classify_pair(theta_lo: float, theta_hi: float, rho0: float, x: float, y: float) -> PairRegime:
    """Regime of the pair (x, y) relative to thresholds rho0+theta_lo <= rho0+theta_hi."""
    if theta_lo > theta_hi:
        raise ValueError("theta_lo must be <= theta_hi")
    return PairRegime(int(_classify_pairs(theta_lo, theta_hi, rho0, np.asarray(x, float), np.asarray(y, float))))


def _classify_pairs(theta_lo, theta_hi, rho0, x, y):
    l = rho0 + theta_lo
    h = rho0 + theta_hi
    xa = np.where(x < l, 0, np.where(x < h, 1, 2))
    yc = np.where(y <= l, 0, np.where(y <= h, 1, 2))
    return 3 * xa + yc + 1


def _pair_arrays(path: PathSample):
    v = path.values
    return v[:-1], v[1:]


def _log_ratio_terms(path: PathSample, params0: ModelParams, theta: float) -> np.ndarray:
    x, y = _pair_arrays(path)
    t = 1.0 / path.n
    num = log_transition_density(params0.with_rho(params0.rho + theta), t, x, y)
    den = log_transition_density(params0, t, x, y)
    return np.asarray(num - den, dtype=float)


def ell_n(path: PathSample, params0: ModelParams, theta: float) -> float:
    """Normalized log-likelihood at shift theta (reference threshold params0.rho).

    Compensated summation in ascending k; exactly 0.0 at theta == 0.
    """
    return math.fsum(_log_ratio_terms(path, params0, float(theta)))


def regime_sums(path: PathSample, params0: ModelParams, theta: float) -> np.ndarray:
    """The nine regime sums; their total equals ell_n.

    For theta >= 0 the thresholds are (rho0, rho0+theta); negative theta is
    handled symmetrically with (rho0+theta, rho0).
    """
    theta = float(theta)
    terms = _log_ratio_terms(path, params0, theta)
    lo, hi = (theta, 0.0) if theta < 0 else (0.0, theta)
    x, y = _pair_arrays(path)
    reg = _classify_pairs(lo, hi, params0.rho, x, y)
    return np.array([math.fsum(terms[reg == j]) for j in range(1, 10)])


def ell_n_sequential(path: PathSample, params0: ModelParams, theta: float, t: float) -> float:
    """Partial sum of ell_n over the first floor(n*t) pairs."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must be in [0, 1]")
    m = int(math.floor(path.n * t))
    if m == 0:
        return 0.0
    terms = _log_ratio_terms(path, params0, float(theta))
    return math.fsum(terms[:m])


def drift_constants(alpha: float, beta: float) -> DriftConstants:
    """Closed-form drift-expansion constants for volatilities (alpha, beta)."""
    a, b = float(alpha), float(beta)
    if a <= 0 or b <= 0:
        raise ValueError("alpha and beta must be positive")
    log_ba = math.log(b * b / (a * a))
    F = -(2.0 * (a - b) / (a * b) + (a / b) * (2.0 / (a + b)) * log_ba)
    F_tilde = -(2.0 * (b - a) / (a * b) + (b / a) * (2.0 / (a + b)) * (-log_ba))
    b_const = (a * a - b * b) / (a * a * b * b) + log_ba / (b * b)
    b_prime = (b * b - a * a) / (a * a * b * b) - log_ba / (a * a)
    lambda_f = math.sqrt(math.pi / 2.0) * (1.0 / a + 1.0 / b)
    return DriftConstants(F=F, F_tilde=F_tilde, b=b_const, b_prime=b_prime, lambda_f=lambda_f)


def lambda_n_statistic(path: PathSample, params0: ModelParams, t: float) -> float:
    """Gaussian-kernel occupation statistic with the sqrt(n/(2 pi)) prefactor."""
    if not 0.0 < t <= 1.0:
        raise ValueError("t must be in (0, 1]")
    n = path.n
    m = int(math.floor(n * t))
    x = path.values[:m]
    a, b, r = params0.alpha, params0.beta, params0.rho
    u2 = n * (x - r) ** 2
    with np.errstate(under="ignore"):
        w = np.where(x < r, np.exp(-u2 / (2.0 * a * a)), np.exp(-u2 / (2.0 * b * b)))
    return math.sqrt(n / (2.0 * math.pi)) * float(np.sum(w))


def gaussian_kernel_pair(alpha: float, beta: float) -> Callable[[np.ndarray], np.ndarray]:
    """Two-sided Gaussian kernel: exp(-u^2/2 alpha^2) below 0, beta above."""

    def f(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(under="ignore"):
            return np.where(
                u < 0.0,
                np.exp(-(u * u) / (2.0 * alpha * alpha)),
                np.exp(-(u * u) / (2.0 * beta * beta)),
            )

    return f


def indicator_window(lo: float, hi: float) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator of the half-open window [lo, hi)."""

    def f(u):
        u = np.asarray(u, dtype=float)
        return ((u >= lo) & (u < hi)).astype(float)

    return f


def _logp_scalar(a: float, b: float, r: float, t: float, x: float, y: float) -> float:
    """Scalar log transition density in pure python (hot path of quadrature)."""
    lg = -0.5 * math.log(2.0 * math.pi * t)
    if a == b:
        return lg - math.log(a) - (y - x) ** 2 / (2.0 * t * a * a)
    c = (a - b) / (a + b)
    if x < r:
        if y <= r:
            q = 2.0 * (x - r) * (y - r) / (t * a * a)
            return lg - math.log(a) - (y - x) ** 2 / (2.0 * t * a * a) + math.log1p(
                -c * math.exp(-q)
            )
        z = (y - r) / b - (x - r) / a
        return lg + math.log(2.0 * a / ((a + b) * b)) - z * z / (2.0 * t)
    if y > r:
        q = 2.0 * (x - r) * (y - r) / (t * b * b)
        return lg - math.log(b) - (y - x) ** 2 / (2.0 * t * b * b) + math.log1p(
            c * math.exp(-q)
        )
    z = (y - r) / a - (x - r) / b
    return lg + math.log(2.0 * b / ((a + b) * a)) - z * z / (2.0 * t)


def drift_numeric(
    path: PathSample,
    params0: ModelParams,
    theta: float,
    max_scaled: float = 50.0,
    epsabs: float = 1e-13,
) -> float:
    """Drift term B_n(theta) = sum of conditional expectations, by quadrature.

    Each term is the integral of log(p^(rho0+theta)/p^(rho0))(x, .) against
    p^(rho0)(x, .), split at the two density kinks rho0 and rho0+theta.
    Nonpositive up to quadrature tolerance (Jensen).  Enforces
    |theta| <= max_scaled/sqrt(n).
    """
    theta = float(theta)
    n = path.n
    if abs(theta) > max_scaled / math.sqrt(n):
        raise ValueError(
            f"|theta|={abs(theta):.3g} exceeds {max_scaled}/sqrt(n)={max_scaled / math.sqrt(n):.3g}"
        )
    if theta == 0.0:
        return 0.0
    t = 1.0 / n
    a, b, r0 = params0.alpha, params0.beta, params0.rho
    pnum = params0.with_rho(r0 + theta)
    s = max(a, b) * math.sqrt(t)
    cutoff = max(a, b) * math.sqrt(120.0 / n)

    lo_kink, hi_kink = sorted((r0, r0 + theta))
    r_num = r0 + theta

    def integrand(y, x):
        lden = _logp_scalar(a, b, r0, t, x, y)
        lr = _logp_scalar(a, b, r_num, t, x, y) - lden
        return lr * math.exp(lden)

    total = []
    for x in path.values[:-1]:
        if abs(x - r0) > cutoff and abs(x - r0 - theta) > cutoff:
            continue  # contribution below ~1e-30 in absolute value
        left = min(x - 14.0 * s, lo_kink - 2.0 * s)
        right = max(x + 14.0 * s, hi_kink + 2.0 * s)
        pts = [p for p in (lo_kink, hi_kink, x) if left < p < right]
        val, err = quad(
            integrand,
            left,
            right,
            args=(x,),
            points=sorted(set(pts)),
            epsabs=epsabs,
            epsrel=1e-11,
            limit=200,
        )
        if err > 1e-9:
            raise NumericalError(
                f"drift quadrature did not converge at x={x}: abserr={err:.3g}"
            )
        total.append(val)
    return math.fsum(total)


# ---------------------------------------------------------------------------
# Fast landscape evaluation
# ---------------------------------------------------------------------------


class LandscapeEvaluator:
    """Evaluates ell_n over many theta values in near-linear time.

    A pair (x, y) contributes a theta-dependent term only while the shifted
    threshold rho = rho0 + theta lies inside [min(x,y) - w_lo, max(x,y) + w_hi],
    where the widths w are chosen so that outside this support the reflection
    correction of the density is below exp(-46).  Outside the support the
    contribution is one of two constants, accumulated with prefix sums over
    the sorted support edges.  The same correction-dropping rule is applied
    to the reference denominator, which keeps ell_n(0) exactly zero.

    ``convention`` selects the value ("value") or the limit from below in
    theta ("left"); the two differ exactly at thresholds equal to an observed
    end point of a pair, where the log-likelihood jumps.
    """

    def __init__(self, path: PathSample, params0: ModelParams):
        self.params0 = params0
        self.n = path.n
        self.t = 1.0 / path.n
        a, b, r0 = params0.alpha, params0.beta, params0.rho
        self.a, self.b, self.rho0 = a, b, r0
        self.degenerate = a == b
        x, y = _pair_arrays(path)
        self.x, self.y = x, y
        if self.degenerate:
            return
        n = self.n
        self.c = (a - b) / (a + b)
        self.rising = y > x
        self.m = np.minimum(x, y)
        self.M = np.maximum(x, y)
        delta = self.M - self.m
        lg = -0.5 * math.log(2.0 * math.pi * self.t)
        d2n = (y - x) ** 2 * n
        self.c1 = lg - math.log(a) - d2n / (2.0 * a * a)  # both-below main term
        self.c2 = lg - math.log(b) - d2n / (2.0 * b * b)  # both-above main term
        self.K3 = lg + math.log(2.0 * a / ((a + b) * b))
        self.K4 = lg + math.log(2.0 * b / ((a + b) * a))
        w_lo = 0.5 * (-delta + np.sqrt(delta * delta + 2.0 * _Q_CUT * b * b / n))
        w_hi = 0.5 * (-delta + np.sqrt(delta * delta + 2.0 * _Q_CUT * a * a / n))
        self.lo_edge = self.m - w_lo  # rho-space support edges
        self.hi_edge = self.M + w_hi
        self.a_theta = self.lo_edge - r0
        self.b_theta = self.hi_edge - r0

        idx_all = np.arange(n)
        self.den = self._pair_logdensity(idx_all, np.float64(r0), "value")
        A = self.c2 - self.den  # contribution for theta < a_theta
        B = self.c1 - self.den  # contribution for theta > b_theta

        ia = np.argsort(self.a_theta, kind="stable")
        self.a_sorted = self.a_theta[ia]
        suff = np.zeros(n + 1, dtype=np.longdouble)
        suff[:n] = np.cumsum(A[ia][::-1].astype(np.longdouble))[::-1]
        self.suffixA = suff.astype(float)
        ib = np.argsort(self.b_theta, kind="stable")
        self.b_sorted = self.b_theta[ib]
        pref = np.zeros(n + 1, dtype=np.longdouble)
        pref[1:] = np.cumsum(B[ib].astype(np.longdouble))
        self.prefixB = pref.astype(float)

    # regime value of the numerator log-density for selected pairs at rho;
    # corrections and straddle formulas are only evaluated on selected lanes
    def _pair_logdensity(self, idx, rho, convention):
        x = self.x[idx]
        y = self.y[idx]
        rising = self.rising[idx]
        scalar = np.ndim(rho) == 0
        rho1 = np.atleast_1d(np.asarray(rho, dtype=float))
        X = x[:, None]
        Y = y[:, None]
        R = rising[:, None]
        P = rho1[None, :]
        if convention == "value":
            reg2 = np.where(R, P <= X, P < Y)
            reg1 = np.where(R, P >= Y, P > X)
        elif convention == "left":
            reg2 = np.where(R, P <= X, P <= Y)
            reg1 = np.where(R, P > Y, P > X)
        else:
            raise ValueError(f"unknown convention {convention!r}")

        n = self.n
        a, b, c = self.a, self.b, self.c
        out = np.where(
            reg2, self.c2[idx][:, None], np.where(reg1, self.c1[idx][:, None], 0.0)
        )
        with np.errstate(under="ignore"):
            m = reg2 & (P > self.lo_edge[idx][:, None])
            if m.any():
                i, j = np.nonzero(m)
                q = 2.0 * n * (x[i] - rho1[j]) * (y[i] - rho1[j]) / (b * b)
                out[i, j] += np.log1p(c * np.exp(-q))
            m = reg1 & (P < self.hi_edge[idx][:, None])
            if m.any():
                i, j = np.nonzero(m)
                q = 2.0 * n * (x[i] - rho1[j]) * (y[i] - rho1[j]) / (a * a)
                out[i, j] += np.log1p(-c * np.exp(-q))
            m = ~(reg2 | reg1)
            if m.any():
                i, j = np.nonzero(m)
                dy = y[i] - rho1[j]
                dx = x[i] - rho1[j]
                z = np.where(rising[i], dy / b - dx / a, dy / a - dx / b)
                out[i, j] = np.where(rising[i], self.K3, self.K4) - n * z * z / 2.0
        return out[:, 0] if scalar else out

    def _constants_part(self, thetas):
        ia = np.searchsorted(self.a_sorted, thetas, side="right")
        ib = np.searchsorted(self.b_sorted, thetas, side="left")
        return self.suffixA[ia] + self.prefixB[ib]

    def values(self, thetas, convention: str = "value", block: int = 512) -> np.ndarray:
        """ell_n at each theta (any order); 'left' gives limits from below."""
        th = np.atleast_1d(np.asarray(thetas, dtype=float))
        if self.degenerate:
            return np.zeros_like(th)
        order = np.argsort(th, kind="stable")
        sth = th[order]
        out = self._constants_part(sth)
        r0 = self.rho0
        for start in range(0, sth.size, block):
            blk = sth[start : start + block]
            sup = (self.a_theta <= blk[-1]) & (self.b_theta >= blk[0])
            idx = np.nonzero(sup)[0]
            if not idx.size:
                continue
            rho = r0 + blk
            g = self._pair_logdensity(idx, rho, convention)
            contrib = g - self.den[idx][:, None]
            inside = (self.a_theta[idx][:, None] <= blk[None, :]) & (
                blk[None, :] <= self.b_theta[idx][:, None]
            )
            out[start : start + block] += np.sum(np.where(inside, contrib, 0.0), axis=0)
        res = np.empty_like(out)
        res[order] = out
        return res

    def value(self, theta: float, convention: str = "value") -> float:
        """Single ell_n evaluation (compensated sum over active pairs)."""
        theta = float(theta)
        if self.degenerate:
            return 0.0
        base = float(self._constants_part(np.array([theta]))[0])
        active = (self.a_theta <= theta) & (theta <= self.b_theta)
        idx = np.nonzero(active)[0]
        if not idx.size:
            return base
        g = self._pair_logdensity(idx, np.float64(self.rho0 + theta), convention)
        return base + math.fsum(np.asarray(g - self.den[idx], dtype=float))

    def left_limit(self, theta: float) -> float:
        """Limit of ell_n from below at theta."""
        return self.value(theta, convention="left")

    def landscape(self, thetas) -> LikelihoodLandscape:
        """Full landscape object: values, breakpoints, and limits from below
        at every breakpoint inside the evaluated range."""
        th = np.atleast_1d(np.asarray(thetas, dtype=float))
        vals = self.values(th)
        shifted = np.unique(np.concatenate((self.x, self.y))) - self.rho0
        lo, hi = float(np.min(th)), float(np.max(th))
        breaks = shifted[(shifted >= lo) & (shifted <= hi)]
        lvals = self.values(breaks, convention="left", block=256)
        return LikelihoodLandscape(
            thetas=th,
            values=vals,
            breakpoints=breaks,
            left_limits={float(b): float(v) for b, v in zip(breaks, lvals)},
        )

    def grid_max(self, lo: float, hi: float, step: float, block: int = 65536):
        """Max of ell_n over the grid lo, lo+step, ..., without materializing it."""
        if self.degenerate:
            return 0.0, lo
        best = -math.inf
        best_theta = lo
        npts = int(math.floor((hi - lo) / step)) + 1
        for start in range(0, npts, block):
            stop = min(start + block, npts)
            th = lo + step * np.arange(start, stop)
            vals = self.values(th)
            j = int(np.argmax(vals))
            if vals[j] > best:
                best = float(vals[j])
                best_theta = float(th[j])
        return best, best_theta


def export_landscape(csv_file, thetas, values, meta: dict) -> None:
    """Write a landscape as CSV `theta,ell` with a JSON metadata sidecar."""
    p = Path(csv_file)
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "ell"])
        for th, val in zip(np.asarray(thetas), np.asarray(values)):
            w.writerow([repr(float(th)), repr(float(val))])
    with p.with_suffix(".json").open("w") as fh:
        json.dump(meta, fh, indent=2, default=str)
