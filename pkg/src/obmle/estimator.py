"""Scikit-learn style front end for threshold estimation.

``ThresholdMLE`` wraps the full pipeline (argsup search, calibrated local
time, limit-law quantiles, confidence interval) behind a fit() API with
get_params/set_params so it composes with sklearn tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DegenerateModelError
from .inference import confidence_interval, local_time_estimator_calibrated
from .likelihood import ell_n
from .limit_law import limit_params, limit_quantiles
from .mle import argsup_mle
from .model import ModelParams
from .sampling import PathSample, RngStream

__all__ = ["ThresholdMLE"]


def _validate_path_array(X) -> np.ndarray:
    """Accept a 1d array-like or a single-column 2d array of path values."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1d path of observations, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError("path must contain at least two observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError("path values must be finite")
    return arr


class ThresholdMLE(BaseEstimator):
    """Maximum-likelihood threshold estimator for two-regime volatility paths.

    Parameters
    ----------
    alpha, beta : volatilities below / at-or-above the threshold (known).
    reference : center of the search window; the likelihood is normalized
        against this threshold value.
    window : search interval for rho - reference.
    grid_step : sub-grid step of the argsup search; default 1/(100 n).
    level : miscoverage level of the confidence interval (0.1 = 90% CI).
    n_quantile_draws : Monte Carlo draws for the limit-law quantiles.
    seed : seed of the quantile sampling stream.

    Attributes (after fit)
    ----------------------
    rho_ : point estimate. local_time_ : calibrated local-time estimate at
    rho_. ci_low_, ci_high_ : confidence bounds (infinite when the path never
    crosses the estimate). report_ : the full EstimationReport.
    """

    def __init__(
        self,
        alpha: float = 1.0,
        beta: float = 1.0,
        reference: float = 0.0,
        window=(-1.0, 1.0),
        grid_step: float | None = None,
        level: float = 0.1,
        n_quantile_draws: int = 20_000,
        tail_tol: float = 1e-6,
        seed: int = 0,
    ):
        self.alpha = alpha
        self.beta = beta
        self.reference = reference
        self.window = window
        self.grid_step = grid_step
        self.level = level
        self.n_quantile_draws = n_quantile_draws
        self.tail_tol = tail_tol
        self.seed = seed

    def _params0(self) -> ModelParams:
        return ModelParams(self.alpha, self.beta, self.reference)

    def fit(self, X, y=None):
        """Estimate the threshold from one discretely observed path."""
        values = _validate_path_array(X)
        n = values.size - 1
        path = PathSample(n=n, x0=float(values[0]), values=values)
        params0 = self._params0()
        res = argsup_mle(path, params0, window=self.window, grid_step=self.grid_step)
        self.rho_ = res.rho_hat
        self.sup_value_ = res.value
        self.attained_as_left_limit_ = res.attained_as_left_limit
        self.n_ = n
        l_hat = local_time_estimator_calibrated(path, res.rho_hat, self.alpha, self.beta)
        self.local_time_ = l_hat
        try:
            p = limit_params(self.alpha, self.beta)
        except DegenerateModelError:
            # alpha == beta: flat likelihood, no threshold information
            self.report_ = confidence_interval(
                res.rho_hat, 0.0, n, 0.0, 0.0, self.level
            )
        else:
            q_lo, q_hi = limit_quantiles(
                p,
                self.level,
                self.n_quantile_draws,
                RngStream(self.seed, 0),
                tail_tol=self.tail_tol,
            )
            self.report_ = confidence_interval(
                res.rho_hat, l_hat, n, q_lo, q_hi, self.level
            )
        self.ci_low_ = self.report_.ci_lo
        self.ci_high_ = self.report_.ci_hi
        return self

    def score(self, X, y=None) -> float:
        """Normalized log-likelihood of a path at the fitted threshold."""
        if not hasattr(self, "rho_"):
            raise RuntimeError("estimator is not fitted")
        values = _validate_path_array(X)
        path = PathSample(n=values.size - 1, x0=float(values[0]), values=values)
        return ell_n(path, self._params0(), self.rho_ - self.reference)
