import numpy as np
import pytest
from scipy.stats import kstest, norm

from obmle import (
    ModelParams,
    NumericalError,
    PathSample,
    RngStream,
    envelope,
    export_path,
    import_path,
    sample_transition,
    simulate_path,
    transition_cdf,
)
from obmle.sampling import _rejection_sample


class TestRngStream:
    def test_identical_identity_identical_draws(self):
        a = RngStream(123, 5).generator().standard_normal(8)
        b = RngStream(123, 5).generator().standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(123, 5).generator().standard_normal(8)
        b = RngStream(123, 6).generator().standard_normal(8)
        assert not np.array_equal(a, b)

    def test_children_independent_of_parent_consumption(self):
        parent = RngStream(9, 1)
        parent.generator().standard_normal(100)
        c1 = parent.child(3).generator().standard_normal(4)
        c2 = RngStream(9, 1).child(3).generator().standard_normal(4)
        np.testing.assert_array_equal(c1, c2)


class TestPathSample:
    def test_validation(self):
        with pytest.raises(ValueError):
            PathSample(n=2, x0=0.0, values=np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            PathSample(n=1, x0=0.5, values=np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            PathSample(n=1, x0=0.0, values=np.array([0.0, np.inf]))


class TestSampleTransition:
    def test_single_step_matches_path(self, fig_params):
        y = sample_transition(fig_params, 1.0, 0.0, RngStream(4, 2))
        path = simulate_path(fig_params, 1, 0.0, RngStream(4, 2))
        np.testing.assert_array_equal(path.values, [0.0, y])

    def test_gaussian_case_ks(self):
        p = ModelParams(1.0, 1.0, 0.0)
        rng = RngStream(1, 0)
        draws = np.array([sample_transition(p, 1.0, 0.0, rng) for _ in range(10_000)])
        assert kstest(draws, norm.cdf).pvalue > 0.01

    def test_switching_case_ks_small_t(self, fig_params):
        rng = RngStream(2, 0)
        t = 1e-3
        draws = np.array([sample_transition(fig_params, t, 0.0, rng) for _ in range(10_000)])
        assert kstest(draws, lambda y: transition_cdf(fig_params, t, 0.0, y)).pvalue > 0.01

    def test_acceptance_rate_matches_envelope(self, fig_params):
        rng = RngStream(3, 0)
        env = envelope(fig_params, 1e-3, 0.0)
        draws = proposals = 0
        while proposals < 100_000:
            _, used = _rejection_sample(fig_params, 1e-3, 0.0, rng)
            draws += 1
            proposals += used
        assert draws / proposals == pytest.approx(1.0 / env.scale_constant, abs=0.01)

    def test_proposal_cap_raises(self, fig_params):
        with pytest.raises(NumericalError):
            _rejection_sample(fig_params, 1e-3, 0.0, RngStream(0, 0), max_proposals=0)

    def test_t_validation(self, fig_params):
        with pytest.raises(ValueError):
            sample_transition(fig_params, 0.0, 0.0, RngStream(0, 0))


class TestSimulatePath:
    def test_reproducible_bitwise(self, fig_params):
        a = simulate_path(fig_params, 200, 0.1, RngStream(11, 3))
        b = simulate_path(fig_params, 200, 0.1, RngStream(11, 3))
        np.testing.assert_array_equal(a.values, b.values)

    def test_quadratic_variation_brownian(self):
        p = ModelParams(1.0, 1.0, 0.37)
        qvs = []
        for r in range(100):
            path = simulate_path(p, 1000, 0.0, RngStream(21, r))
            qvs.append(float(np.sum(path.increments**2)))
        assert np.mean(qvs) == pytest.approx(1.0, abs=0.15)

    def test_occupation_weighted_volatility(self, fig_params):
        # time spent at or above the threshold carries variance beta^2 per unit time
        ratios = []
        for r in range(200):
            path = simulate_path(fig_params, 1000, 0.0, RngStream(22, r))
            above = path.values[:-1] >= 0.0
            if above.sum() < 50:
                continue
            inc = path.increments
            ratios.append(np.sum(inc[above] ** 2) / (above.sum() / 1000))
        mean = float(np.mean(ratios))
        assert abs(mean - fig_params.beta**2) / fig_params.beta**2 < 0.10

    def test_n_validation(self, fig_params):
        with pytest.raises(ValueError):
            simulate_path(fig_params, 0, 0.0, RngStream(0, 0))


class TestPathIO:
    def test_round_trip(self, tmp_path, fig_params):
        sample = simulate_path(fig_params, 50, 0.25, RngStream(5, 7))
        f = tmp_path / "path.csv"
        export_path(sample, f, params=fig_params, seed=5, stream_id=7)
        back, meta = import_path(f)
        np.testing.assert_array_equal(back.values, sample.values)
        assert back.n == 50 and back.x0 == 0.25
        assert meta["alpha"] == 0.5 and meta["seed"] == 5 and meta["stream_id"] == 7

    def test_header_check(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("a,b\n0,0.0\n")
        with pytest.raises(ValueError):
            import_path(f)
