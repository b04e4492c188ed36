"""Threshold estimation for two-regime ("oscillating") Brownian motion.

Closed-form transition law, exact path simulation, the discontinuous
normalized log-likelihood with its argsup maximizer, the compensated-Poisson
limit law of the estimation error, local-time estimation and asymptotic
confidence intervals.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DegenerateModelError, NumericalError
from .estimator import ThresholdMLE
from .inference import (
    EstimationReport,
    confidence_interval,
    crossing_rate_constant,
    local_time_estimator,
    local_time_estimator_calibrated,
    occupation_time_proxy,
    riemann_statistic,
)
from .likelihood import (
    DriftConstants,
    LandscapeEvaluator,
    LikelihoodLandscape,
    PairRegime,
    classify_pair,
    drift_constants,
    drift_numeric,
    ell_n,
    ell_n_sequential,
    gaussian_kernel_pair,
    indicator_window,
    lambda_n_statistic,
    regime_sums,
)
from .limit_law import (
    LimitArgsupSample,
    LimitLawParams,
    limit_params,
    limit_quantiles,
    sample_argsup_batch,
    sample_limit_argsup,
    sample_limit_path,
)
from .mle import ArgsupResult, ArgsupWindowWarning, argsup_mle, breakpoints
from .model import (
    GaussianEnvelope,
    ModelParams,
    Regime,
    envelope,
    log_transition_density,
    regime_of,
    sigma,
    transition_cdf,
    transition_density,
)
from .sampling import (
    PathSample,
    RngStream,
    export_path,
    import_path,
    sample_transition,
    simulate_path,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DegenerateModelError",
    "NumericalError",
    "ModelParams",
    "Regime",
    "GaussianEnvelope",
    "sigma",
    "regime_of",
    "transition_density",
    "log_transition_density",
    "transition_cdf",
    "envelope",
    "PathSample",
    "RngStream",
    "sample_transition",
    "simulate_path",
    "export_path",
    "import_path",
    "PairRegime",
    "DriftConstants",
    "LikelihoodLandscape",
    "LandscapeEvaluator",
    "classify_pair",
    "ell_n",
    "regime_sums",
    "ell_n_sequential",
    "drift_constants",
    "lambda_n_statistic",
    "drift_numeric",
    "gaussian_kernel_pair",
    "indicator_window",
    "ArgsupResult",
    "ArgsupWindowWarning",
    "breakpoints",
    "argsup_mle",
    "LimitLawParams",
    "LimitArgsupSample",
    "limit_params",
    "sample_limit_argsup",
    "sample_argsup_batch",
    "limit_quantiles",
    "sample_limit_path",
    "EstimationReport",
    "local_time_estimator",
    "crossing_rate_constant",
    "local_time_estimator_calibrated",
    "occupation_time_proxy",
    "riemann_statistic",
    "confidence_interval",
    "ThresholdMLE",
]
