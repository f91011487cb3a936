"""Channel generation: scaling, conditional sampling, determinism."""

import numpy as np
import pytest

from ratesplit import (
    ChannelEstimate,
    InvalidConfigError,
    ScenarioPool,
    SystemConfig,
    generate_scenario,
    sample_conditional,
    snr_db_to_power,
)


class TestSystemConfig:
    def test_error_variance_at_20db(self):
        """beta=1, alpha=0.6 at 20 dB gives sigma_e2 = (10^2)^-0.6 = 0.063."""
        cfg = SystemConfig(K=2, Nt=2, Pt=snr_db_to_power(20.0), alpha=0.6, beta=1.0)
        assert cfg.sigma_e2 == pytest.approx(10.0 ** -1.2, rel=1e-12)
        assert cfg.sigma_e2 == pytest.approx(0.063, abs=5e-4)

    def test_error_variance_monotone_in_power(self):
        cfgs = [SystemConfig(K=2, Nt=2, Pt=p, alpha=0.6) for p in (10.0, 100.0, 1000.0)]
        vals = [c.sigma_e2 for c in cfgs]
        assert vals[0] > vals[1] > vals[2]

    def test_alpha_zero_is_constant(self):
        a = SystemConfig(K=2, Nt=2, Pt=10.0, alpha=0.0, beta=0.5).sigma_e2
        b = SystemConfig(K=2, Nt=2, Pt=1e4, alpha=0.0, beta=0.5).sigma_e2
        assert a == b == 0.5

    def test_rejects_sigma_e2_at_least_one(self):
        with pytest.raises(InvalidConfigError):
            SystemConfig(K=2, Nt=2, Pt=10.0, alpha=0.0, beta=1.0)

    def test_rejects_k_above_nt(self):
        with pytest.raises(InvalidConfigError):
            SystemConfig(K=3, Nt=2, Pt=10.0)

    @pytest.mark.parametrize("field,value", [
        ("Pt", -1.0), ("sigma_n2", 0.0), ("alpha", 1.5), ("beta", -0.1),
        ("M", 0), ("eps_R", 0.0), ("max_iters", 0),
    ])
    def test_rejects_bad_fields(self, field, value):
        kwargs = dict(K=2, Nt=2, Pt=10.0)
        kwargs[field] = value
        with pytest.raises(InvalidConfigError):
            SystemConfig(**kwargs)


class TestGenerateScenario:
    def test_zero_error_gives_exact_channel(self, rng):
        cfg = SystemConfig(K=2, Nt=3, Pt=100.0, beta=0.0)
        est, H = generate_scenario(cfg, rng)
        assert est.sigma_e2 == 0.0
        np.testing.assert_array_equal(est.H_hat, H)

    def test_deterministic_given_seed(self):
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0, seed=42)
        a = generate_scenario(cfg, np.random.default_rng(cfg.seed))
        b = generate_scenario(cfg, np.random.default_rng(cfg.seed))
        np.testing.assert_array_equal(a[0].H_hat, b[0].H_hat)
        np.testing.assert_array_equal(a[1], b[1])

    def test_estimate_variance_scaled(self):
        """Estimate entries carry variance 1 - sigma_e2 so the mixing
        preserves unit total per-entry variance."""
        cfg = SystemConfig(K=4, Nt=64, Pt=10.0, alpha=0.0, beta=0.4, seed=1)
        rng = np.random.default_rng(1)
        samples = [generate_scenario(cfg, rng)[0].H_hat for _ in range(40)]
        var = np.mean([np.mean(np.abs(h) ** 2) for h in samples])
        assert var == pytest.approx(1.0 - 0.4, rel=0.05)


class TestSampleConditional:
    def test_zero_error_degenerate(self, rng):
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0, beta=0.0)
        est, _ = generate_scenario(cfg, rng)
        s = sample_conditional(est, 5, rng)
        for m in range(5):
            np.testing.assert_array_equal(s.realizations[m], est.H_hat)

    def test_single_element_sample(self, rng):
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0)
        est, _ = generate_scenario(cfg, rng)
        s = sample_conditional(est, 1, rng)
        assert s.M == 1 and s.realizations.shape == (1, 2, 2)

    def test_empirical_error_variance(self):
        """M = 10^4 draws at sigma_e2 = 0.1: per-entry error variance
        within 5% of the target."""
        est = ChannelEstimate(
            H_hat=np.sqrt(0.9) * np.ones((2, 2), dtype=np.complex128), sigma_e2=0.1
        )
        s = sample_conditional(est, 10000, np.random.default_rng(7))
        err = s.realizations - est.H_hat[None]
        var = np.mean(np.abs(err) ** 2)
        assert abs(var - 0.1) / 0.1 < 0.05
        # conditional mean converges to the estimate
        assert np.abs(err.mean(axis=0)).max() < 0.02

    def test_rejects_bad_m(self, rng):
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0)
        est, _ = generate_scenario(cfg, rng)
        with pytest.raises(ValueError):
            sample_conditional(est, 0, rng)

    def test_per_user_layout(self, rng):
        cfg = SystemConfig(K=3, Nt=4, Pt=100.0)
        est, _ = generate_scenario(cfg, rng)
        s = sample_conditional(est, 6, rng)
        np.testing.assert_array_equal(s.per_user[1, 3], s.realizations[3, :, 1])


class TestScenarioPool:
    def test_error_pool_shared_across_estimates_and_snr(self):
        pool = ScenarioPool(seed=5, Nt=2, K=2, n_channels=3, M=4)
        cfg_a = SystemConfig(K=2, Nt=2, Pt=snr_db_to_power(10), seed=5)
        cfg_b = SystemConfig(K=2, Nt=2, Pt=snr_db_to_power(30), seed=5)
        # normalized errors are identical across channels and powers
        for i in (0, 1, 2):
            for cfg in (cfg_a, cfg_b):
                s = pool.conditional_sample(i, cfg)
                err_n = (s.realizations - pool.estimate(i, cfg).H_hat[None]) / np.sqrt(cfg.sigma_e2)
                np.testing.assert_allclose(err_n, pool._Hn_err, atol=1e-12)

    def test_estimates_differ_per_index(self):
        pool = ScenarioPool(seed=5, Nt=2, K=2, n_channels=2, M=2)
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0, seed=5)
        assert not np.allclose(pool.estimate(0, cfg).H_hat, pool.estimate(1, cfg).H_hat)

    def test_pool_reproducible(self):
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0, seed=11)
        a = ScenarioPool(11, 2, 2, 2, 3).conditional_sample(0, cfg).realizations
        b = ScenarioPool(11, 2, 2, 2, 3).conditional_sample(0, cfg).realizations
        np.testing.assert_array_equal(a, b)

    def test_true_channel_independent_of_sample_pool(self):
        pool = ScenarioPool(seed=5, Nt=2, K=2, n_channels=1, M=3)
        cfg = SystemConfig(K=2, Nt=2, Pt=100.0, seed=5)
        H = pool.true_channel(0, cfg)
        err_true = (H - pool.estimate(0, cfg).H_hat) / np.sqrt(cfg.sigma_e2)
        for m in range(3):
            assert not np.allclose(err_true, pool._Hn_err[m])
