import numpy as np
import pytest

from obmle import ModelParams, RngStream, simulate_path

FIG_ALPHA, FIG_BETA = 0.5, 0.2


@pytest.fixture(scope="session")
def fig_params():
    """Volatility pair and threshold used throughout the simulation study."""
    return ModelParams(FIG_ALPHA, FIG_BETA, 0.0)


@pytest.fixture(scope="session")
def path_n1000(fig_params):
    return simulate_path(fig_params, 1000, 0.0, RngStream(42, 0))


@pytest.fixture(scope="session")
def path_rich(fig_params):
    """A draw with plenty of threshold crossings (raw count 1.14)."""
    return simulate_path(fig_params, 1000, 0.0, RngStream(45, 0))


@pytest.fixture(scope="session")
def path_n4000(fig_params):
    return simulate_path(fig_params, 4000, 0.0, RngStream(7, 0))


@pytest.fixture(scope="session")
def param_draws():
    """Deterministic spread of (alpha, beta, rho, t, x) tuples for oracles."""
    rng = np.random.default_rng(12345)
    draws = []
    for _ in range(20):
        a = float(rng.uniform(0.1, 2.0))
        b = float(rng.uniform(0.1, 2.0))
        r = float(rng.uniform(-1.0, 1.0))
        t = float(rng.uniform(0.001, 1.0))
        x = float(r + rng.normal(0.0, 0.7))
        draws.append((a, b, r, t, x))
    return draws
