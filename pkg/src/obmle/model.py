"""Closed-form transition law of Brownian motion with threshold-switching volatility.

The process has volatility ``alpha`` strictly below a threshold ``rho`` and
``beta`` at or above it.  Its transition density is known in closed form with
four branches depending on the position of the start and end points relative
to the threshold.  This module evaluates the density, its logarithm (in a
form that stays finite for tiny time steps), the conditional CDF, and a
Gaussian envelope that dominates the density (used for exact rejection
sampling).

All functions broadcast over numpy arrays in ``x`` and ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "ModelParams",
    "Regime",
    "GaussianEnvelope",
    "sigma",
    "regime_of",
    "transition_density",
    "log_transition_density",
    "transition_cdf",
    "envelope",
]


@dataclass(frozen=True)
class ModelParams:
    """Volatilities below/above the threshold and the threshold itself."""

    alpha: float
    beta: float
    rho: float

    def __post_init__(self):
        for name in ("alpha", "beta", "rho"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(float(v)):
                raise ValueError(f"{name} must be a finite real, got {v!r}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be strictly positive")

    def with_rho(self, rho: float) -> "ModelParams":
        return ModelParams(self.alpha, self.beta, float(rho))


@dataclass(frozen=True)
class Regime:
    """One of the four branches of the transition density."""

    index: int

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise ValueError("regime index must be in {1,2,3,4}")


@dataclass(frozen=True)
class GaussianEnvelope:
    """Dominating Gaussian: density(y) <= scale_constant * N(y; mean, std^2)."""

    scale_constant: float
    mean: float
    std: float

    def __post_init__(self):
        if self.scale_constant <= 0 or self.std <= 0:
            raise ValueError("scale_constant and std must be positive")

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        z = (y - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t <= 0.0:
        raise ValueError(f"time step must be positive and finite, got {t}")
    return t


def sigma(params: ModelParams, x):
    """Piecewise-constant volatility: alpha for x < rho, beta for x >= rho."""
    x = np.asarray(x, dtype=float)
    return np.where(x < params.rho, params.alpha, params.beta)


def regime_of(params: ModelParams, x: float, y: float) -> Regime:
    """Branch selector for the density at start x, end y.

    Boundary convention: 1 <=> x<rho, y<=rho; 2 <=> x>=rho, y>rho;
    3 <=> x<rho<y; 4 <=> y<=rho<=x.  The point (rho, rho) is regime 4.
    """
    r = params.rho
    if x < r:
        return Regime(1) if y <= r else Regime(3)
    return Regime(2) if y > r else Regime(4)


def _regime_masks(rho: float, x, y):
    below = x < rho
    up = y > rho
    m1 = below & ~up
    m3 = below & up
    m2 = ~below & up
    m4 = ~below & ~up
    return m1, m2, m3, m4


def transition_density(params: ModelParams, t: float, x, y):
    """Density of the process at y after time t, started at x.

    Evaluates the four-branch closed form directly; strictly positive.
    """
    t = _check_t(t)
    a, b, r = params.alpha, params.beta, params.rho
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    norm = 1.0 / math.sqrt(2.0 * math.pi * t)
    if a == b:
        return norm / a * np.exp(-((y - x) ** 2) / (2.0 * t * a * a))

    c = (a - b) / (a + b)
    m1, m2, m3, m4 = _regime_masks(r, x, y)
    out = np.empty_like(x, dtype=float)

    with np.errstate(under="ignore"):
        d2 = (y - x) ** 2
        refl2 = (y - 2.0 * r + x) ** 2
        g_a = np.exp(-d2 / (2.0 * t * a * a))
        g_b = np.exp(-d2 / (2.0 * t * b * b))
        ga_ref = np.exp(-refl2 / (2.0 * t * a * a))
        gb_ref = np.exp(-refl2 / (2.0 * t * b * b))
        out[m1] = (norm / a) * (g_a[m1] - c * ga_ref[m1])
        out[m2] = (norm / b) * (g_b[m2] + c * gb_ref[m2])
        z3 = (y - r) / b - (x - r) / a
        z4 = (y - r) / a - (x - r) / b
        out[m3] = (2.0 * a / ((a + b) * b)) * norm * np.exp(-z3[m3] ** 2 / (2.0 * t))
        out[m4] = (2.0 * b / ((a + b) * a)) * norm * np.exp(-z4[m4] ** 2 / (2.0 * t))
    if out.ndim == 0:
        return float(out)
    return out


def log_transition_density(params: ModelParams, t: float, x, y):
    """log of transition_density, stable for small t.

    Branches 1 and 2 combine two exponentials of very different size; they
    are evaluated as main Gaussian exponent plus log1p of the relative
    reflection term, whose argument 2(x-rho)(y-rho)/(t sigma^2) is >= 0
    inside those branches.
    """
    t = _check_t(t)
    a, b, r = params.alpha, params.beta, params.rho
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    lg = -0.5 * math.log(2.0 * math.pi * t)
    if a == b:
        res = lg - math.log(a) - (y - x) ** 2 / (2.0 * t * a * a)
        return float(res) if res.ndim == 0 else res

    c = (a - b) / (a + b)
    m1, m2, m3, m4 = _regime_masks(r, x, y)
    out = np.empty_like(x, dtype=float)
    with np.errstate(under="ignore"):
        q = 2.0 * (x - r) * (y - r) / t  # >= 0 on branches 1 and 2
        qc = np.clip(q, 0.0, None)
        out[m1] = (
            lg
            - math.log(a)
            - (y[m1] - x[m1]) ** 2 / (2.0 * t * a * a)
            + np.log1p(-c * np.exp(-qc[m1] / (a * a)))
        )
        out[m2] = (
            lg
            - math.log(b)
            - (y[m2] - x[m2]) ** 2 / (2.0 * t * b * b)
            + np.log1p(c * np.exp(-qc[m2] / (b * b)))
        )
        z3 = (y - r) / b - (x - r) / a
        z4 = (y - r) / a - (x - r) / b
        out[m3] = lg + math.log(2.0 * a / ((a + b) * b)) - z3[m3] ** 2 / (2.0 * t)
        out[m4] = lg + math.log(2.0 * b / ((a + b) * a)) - z4[m4] ** 2 / (2.0 * t)
    if out.ndim == 0:
        return float(out)
    return out


def transition_cdf(params: ModelParams, t: float, x, y):
    """Conditional CDF F(y) = P(X_{s+t} <= y | X_s = x), via error functions."""
    t = _check_t(t)
    a, b, r = params.alpha, params.beta, params.rho
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    st = math.sqrt(t)
    if a == b:
        res = ndtr((y - x) / (a * st))
        return float(res) if res.ndim == 0 else res

    c = (a - b) / (a + b)
    below = x < r
    up = y > r
    out = np.empty_like(x, dtype=float)

    # start below the threshold
    m = below & ~up
    out[m] = ndtr((y[m] - x[m]) / (a * st)) - c * ndtr((y[m] - 2.0 * r + x[m]) / (a * st))
    m = below & up
    f_at_r = ndtr((r - x[m]) / (a * st)) - c * ndtr((x[m] - r) / (a * st))
    out[m] = f_at_r + (2.0 * a / (a + b)) * (
        ndtr(((y[m] - r) / b - (x[m] - r) / a) / st) - ndtr((r - x[m]) / (a * st))
    )

    # start at or above the threshold
    m = ~below & ~up
    out[m] = (2.0 * b / (a + b)) * ndtr(((y[m] - r) / a - (x[m] - r) / b) / st)
    m = ~below & up
    f_at_r = (2.0 * b / (a + b)) * ndtr((r - x[m]) / (b * st))
    out[m] = f_at_r + (
        ndtr((y[m] - x[m]) / (b * st)) - ndtr((r - x[m]) / (b * st))
    ) + c * (ndtr((y[m] - 2.0 * r + x[m]) / (b * st)) - ndtr((x[m] - r) / (b * st)))

    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def envelope(params: ModelParams, t: float, x: float) -> GaussianEnvelope:
    """Gaussian envelope dominating the transition density started at x.

    scale_constant = (2 max(a,b)/(a+b)) * (max(a,b)/min(a,b)); the envelope
    equals the density itself when alpha == beta.
    """
    t = _check_t(t)
    a, b = params.alpha, params.beta
    hi, lo = max(a, b), min(a, b)
    scale = (2.0 * hi / (a + b)) * (hi / lo)
    return GaussianEnvelope(scale_constant=scale, mean=float(x), std=hi * math.sqrt(t))
