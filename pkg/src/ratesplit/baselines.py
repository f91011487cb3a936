"""Closed-form baseline precoders and AO initializations.

The four initializations combine a common-precoder direction (first
basis vector, or the dominant left singular vector of the estimate) with
private directions (normalized zero-forcing columns of the pseudo-inverse,
or matched filters h_k / ||h_k||). Powers follow the high-SNR motivated
split q_c = Pt - Pt^alpha, q_k = Pt^alpha / K.
"""

import warnings
from enum import Enum

import numpy as np

from .channel import ChannelEstimate
from .config import SystemConfig
from .ratewmmse import Precoder, PrecoderMode


class InitScheme(str, Enum):
    ZF_E = "ZF-e"
    ZF_SVD = "ZF-SVD"
    MRC_E = "MRC-e"
    MRC_SVD = "MRC-SVD"


class RankDeficientError(ValueError):
    """Estimate has (numerically) deficient column rank."""


_RANK_TOL = 1e-10


def _zf_directions(H_hat: np.ndarray) -> np.ndarray:
    """Unit-norm columns of H (H^H H)^(-1): zero-forcing beamformers."""
    sv = np.linalg.svd(H_hat, compute_uv=False)
    if sv.min() <= _RANK_TOL * sv.max():
        raise RankDeficientError("estimate is rank deficient; ZF directions undefined")
    D = H_hat @ np.linalg.inv(H_hat.conj().T @ H_hat)
    return D / np.linalg.norm(D, axis=0, keepdims=True)


def _mrc_directions(H_hat: np.ndarray) -> np.ndarray:
    return H_hat / np.linalg.norm(H_hat, axis=0, keepdims=True)


def _common_direction(H_hat: np.ndarray, svd: bool) -> np.ndarray:
    Nt = H_hat.shape[0]
    if not svd:
        e1 = np.zeros(Nt, dtype=np.complex128)
        e1[0] = 1.0
        return e1
    U, _, _ = np.linalg.svd(H_hat)
    return U[:, 0]


def init_precoder(
    est: ChannelEstimate,
    cfg: SystemConfig,
    scheme: InitScheme = InitScheme.MRC_SVD,
    mode: PrecoderMode = PrecoderMode.RS,
) -> Precoder:
    """AO starting point; total power equals Pt exactly.

    RS mode: q_c = Pt - Pt^alpha on the scheme's common direction and
    Pt^alpha/K per private stream. NoRS mode: no common stream, Pt/K per
    private stream. ZF schemes fall back to MRC directions (with a
    warning) when the estimate is rank deficient.
    """
    scheme = InitScheme(scheme)
    mode = PrecoderMode(mode)
    zf = scheme in (InitScheme.ZF_E, InitScheme.ZF_SVD)
    try:
        dirs = _zf_directions(est.H_hat) if zf else _mrc_directions(est.H_hat)
    except RankDeficientError:
        warnings.warn("rank-deficient estimate: falling back to MRC directions")
        dirs = _mrc_directions(est.H_hat)

    Pt, K = cfg.Pt, cfg.K
    if mode is PrecoderMode.NoRS:
        q_c, q_k = 0.0, Pt / K
        pc = np.zeros(est.Nt, dtype=np.complex128)
    else:
        q_c = max(Pt - Pt**cfg.alpha, 0.0)   # clamp guards Pt < 1
        q_k = (Pt - q_c) / K
        svd = scheme in (InitScheme.ZF_SVD, InitScheme.MRC_SVD)
        pc = np.sqrt(q_c) * _common_direction(est.H_hat, svd)
    return Precoder(pc, np.sqrt(q_k) * dirs, mode)


def water_filling(gains: np.ndarray, budget: float) -> np.ndarray:
    """Powers q_k = (mu - 1/g_k)+ with sum q = budget, solved exactly.

    gains are the effective SNR slopes g_k (rate_k = log2(1 + q_k g_k)).
    """
    g = np.asarray(gains, dtype=float)
    if np.any(g <= 0) or budget < 0:
        raise ValueError("gains must be positive and budget nonnegative")
    q = np.zeros_like(g)
    if budget == 0:
        return q
    inv = 1.0 / g
    order = np.argsort(inv)
    inv_sorted = inv[order]
    # with the j strongest users active: mu = (budget + sum_{i<j} inv_i) / j;
    # the largest j with mu > inv_(j) is consistent
    for j in range(len(g), 0, -1):
        mu = (budget + inv_sorted[:j].sum()) / j
        if mu > inv_sorted[j - 1] or j == 1:
            active = order[:j]
            q[active] = np.maximum(mu - inv[active], 0.0)
            break
    return q


def nors_zf_wf(est: ChannelEstimate, cfg: SystemConfig):
    """ZF beamforming with water-filling that trusts the estimate.

    Returns the precoder and the sum rate predicted under a perfect
    estimate (the true sampled performance is generally lower).
    """
    dirs = _zf_directions(est.H_hat)
    eff = np.abs(np.einsum("nk,nk->k", est.H_hat.conj(), dirs)) ** 2 / cfg.sigma_n2
    q = water_filling(eff, cfg.Pt)
    P = Precoder(np.zeros(est.Nt, dtype=np.complex128), np.sqrt(q) * dirs, PrecoderMode.NoRS)
    predicted = float(np.log2(1.0 + q * eff).sum())
    return P, predicted


def rs_zf_svd_baseline(est: ChannelEstimate, cfg: SystemConfig) -> Precoder:
    """DoF-motivated split: SVD common direction at q_c = Pt - Pt^alpha,
    ZF private directions with water-filling over the Pt^alpha remainder."""
    dirs = _zf_directions(est.H_hat)
    Pt = cfg.Pt
    q_c = max(Pt - Pt**cfg.alpha, 0.0)
    eff = np.abs(np.einsum("nk,nk->k", est.H_hat.conj(), dirs)) ** 2 / cfg.sigma_n2
    q = water_filling(eff, Pt - q_c)
    pc = np.sqrt(q_c) * _common_direction(est.H_hat, svd=True)
    return Precoder(pc, np.sqrt(q) * dirs, PrecoderMode.RS)
