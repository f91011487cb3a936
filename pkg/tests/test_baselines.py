"""Initializations, zero-forcing baselines, water-filling."""

import warnings

import numpy as np
import pytest

from oracles import water_level_bisection
from ratesplit import (
    ChannelEstimate,
    InitScheme,
    PrecoderMode,
    SystemConfig,
    generate_scenario,
    init_precoder,
    nors_zf_wf,
    rs_zf_svd_baseline,
    water_filling,
)


def _estimate(rng, Nt=3, K=2, sigma_e2=0.05):
    H = (rng.standard_normal((Nt, K)) + 1j * rng.standard_normal((Nt, K))) / np.sqrt(2)
    return ChannelEstimate(H_hat=np.sqrt(1 - sigma_e2) * H, sigma_e2=sigma_e2)


class TestInitPrecoder:
    def test_alpha_one_turns_common_off(self, rng):
        cfg = SystemConfig(K=2, Nt=3, Pt=100.0, alpha=1.0, beta=0.9)
        P = init_precoder(_estimate(rng), cfg, InitScheme.MRC_SVD)
        assert np.linalg.norm(P.P_common) == 0.0
        assert P.total_power == pytest.approx(100.0, rel=1e-10)

    def test_alpha_zero_power_split(self, rng):
        cfg = SystemConfig(K=2, Nt=3, Pt=100.0, alpha=0.0, beta=0.05)
        P = init_precoder(_estimate(rng), cfg, InitScheme.MRC_E)
        assert np.linalg.norm(P.P_common) ** 2 == pytest.approx(99.0, rel=1e-10)
        for k in range(2):
            assert np.linalg.norm(P.P_private[:, k]) ** 2 == pytest.approx(0.5, rel=1e-10)

    def test_unitary_estimate_zf_directions_are_columns(self, rng):
        """For a unitary estimate the pseudo-inverse is the matrix itself,
        so the ZF directions equal its columns."""
        Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        U, _ = np.linalg.qr(Z)
        est = ChannelEstimate(H_hat=U, sigma_e2=0.0)
        cfg = SystemConfig(K=3, Nt=3, Pt=10.0, alpha=0.5, beta=0.0)
        P = init_precoder(est, cfg, InitScheme.ZF_E)
        q_k = 10.0 ** 0.5 / 3
        np.testing.assert_allclose(P.P_private, np.sqrt(q_k) * U, atol=1e-10)

    def test_zf_nulls_cross_channels(self, rng):
        est = _estimate(rng, Nt=4, K=3)
        cfg = SystemConfig(K=3, Nt=4, Pt=50.0)
        P = init_precoder(est, cfg, InitScheme.ZF_SVD)
        H = est.H_hat
        for k in range(3):
            for j in range(3):
                if j != k:
                    leak = abs(np.vdot(H[:, j], P.P_private[:, k]))
                    assert leak <= 1e-10 * np.linalg.norm(H[:, j]) * np.linalg.norm(P.P_private[:, k])

    def test_common_direction_e1_vs_svd(self, rng):
        est = _estimate(rng)
        cfg = SystemConfig(K=2, Nt=3, Pt=100.0, alpha=0.5)
        P_e = init_precoder(est, cfg, InitScheme.MRC_E)
        dir_e = P_e.P_common / np.linalg.norm(P_e.P_common)
        np.testing.assert_allclose(dir_e, [1, 0, 0], atol=1e-12)
        P_svd = init_precoder(est, cfg, InitScheme.MRC_SVD)
        U, _, _ = np.linalg.svd(est.H_hat)
        dir_svd = P_svd.P_common / np.linalg.norm(P_svd.P_common)
        assert abs(abs(np.vdot(dir_svd, U[:, 0])) - 1) < 1e-10

    def test_exact_power_all_schemes(self, rng):
        est = _estimate(rng)
        cfg = SystemConfig(K=2, Nt=3, Pt=31.4, alpha=0.37)
        for scheme in InitScheme:
            for mode in PrecoderMode:
                P = init_precoder(est, cfg, scheme, mode)
                assert P.total_power == pytest.approx(31.4, rel=1e-10)

    def test_rank_deficient_falls_back_to_mrc(self, rng):
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        H = np.stack([h, 2 * h], axis=1)
        est = ChannelEstimate(H_hat=H, sigma_e2=0.0)
        cfg = SystemConfig(K=2, Nt=3, Pt=10.0, beta=0.0)
        with pytest.warns(UserWarning, match="rank-deficient"):
            P = init_precoder(est, cfg, InitScheme.ZF_E)
        dirs = P.P_private / np.linalg.norm(P.P_private, axis=0, keepdims=True)
        np.testing.assert_allclose(np.abs(np.vdot(dirs[:, 0], dirs[:, 1])), 1.0, atol=1e-10)


class TestWaterFilling:
    def test_single_user_takes_all(self):
        q = water_filling(np.array([2.0]), 7.0)
        assert q[0] == pytest.approx(7.0)

    def test_equal_gains_split_evenly(self):
        q = water_filling(np.array([1.5, 1.5]), 10.0)
        np.testing.assert_allclose(q, [5.0, 5.0])

    def test_weak_user_shut_off(self):
        q = water_filling(np.array([100.0, 1e-4]), 1.0)
        assert q[1] == 0.0 and q[0] == pytest.approx(1.0)

    def test_matches_bisection_oracle(self, rng):
        for _ in range(20):
            g = 10 ** rng.uniform(-2, 2, size=rng.integers(1, 6))
            budget = float(10 ** rng.uniform(-1, 3))
            np.testing.assert_allclose(
                water_filling(g, budget), water_level_bisection(g, budget), atol=1e-8)

    def test_budget_exhausted(self, rng):
        g = 10 ** rng.uniform(-1, 1, size=4)
        q = water_filling(g, 25.0)
        assert q.sum() == pytest.approx(25.0, rel=1e-12)


class TestNorsZfWf:
    def test_single_user(self, rng):
        est = _estimate(rng, Nt=3, K=1)
        cfg = SystemConfig(K=1, Nt=3, Pt=20.0)
        P, predicted = nors_zf_wf(est, cfg)
        assert P.total_power == pytest.approx(20.0, rel=1e-10)
        expected = np.log2(1 + 20.0 * np.linalg.norm(est.H_hat) ** 2)
        assert predicted == pytest.approx(expected, rel=1e-10)

    def test_predicted_rate_uses_estimate_as_truth(self, rng):
        est = _estimate(rng)
        cfg = SystemConfig(K=2, Nt=3, Pt=40.0)
        P, predicted = nors_zf_wf(est, cfg)
        # on the estimate, ZF leaves no interference: rate decouples
        H = est.H_hat
        rates = [
            np.log2(1 + abs(np.vdot(H[:, k], P.P_private[:, k])) ** 2)
            for k in range(2)
        ]
        assert predicted == pytest.approx(sum(rates), rel=1e-9)


class TestRsZfSvdBaseline:
    def test_alpha_one_reduces_to_zf_wf(self, rng):
        est = _estimate(rng)
        cfg = SystemConfig(K=2, Nt=3, Pt=60.0, alpha=1.0)
        P = rs_zf_svd_baseline(est, cfg)
        P_ref, _ = nors_zf_wf(est, cfg)
        assert np.linalg.norm(P.P_common) == 0.0
        np.testing.assert_allclose(P.P_private, P_ref.P_private, atol=1e-10)

    def test_alpha_zero_nearly_pure_multicast(self, rng):
        est = _estimate(rng)
        cfg = SystemConfig(K=2, Nt=3, Pt=100.0, alpha=0.0, beta=0.063)
        P = rs_zf_svd_baseline(est, cfg)
        assert np.linalg.norm(P.P_common) ** 2 == pytest.approx(99.0, rel=1e-10)
        assert np.linalg.norm(P.P_private) ** 2 == pytest.approx(1.0, rel=1e-10)

    def test_power_accounting(self, rng):
        for alpha in (0.0, 0.3, 0.6, 0.9):
            cfg = SystemConfig(K=2, Nt=3, Pt=200.0, alpha=alpha, beta=0.01)
            P = rs_zf_svd_baseline(_estimate(rng), cfg)
            assert P.total_power == pytest.approx(200.0, rel=1e-10)
