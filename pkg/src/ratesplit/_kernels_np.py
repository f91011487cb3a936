"""Numpy implementation of the per-realization kernels.

These are the hot inner loops of the alternating optimization: for every
user k and conditional realization m, form the MMSE equalizers/weights in
closed form and accumulate the sample-average quantities feeding the
precoder update. A compiled twin lives in _kernels_cy; both share this
calling convention:

    Hk        (K, M, Nt) complex128, per-user conditional channel vectors
    Pc        (Nt,)      complex128, common precoder
    Pp        (Nt, K)    complex128, private precoders
    sigma_n2  float

With u = 1/eps_mmse, the per-realization pieces reduce to

    t_c = |h^H p_c|^2 / (T * T_c)      t = |h^H p_k|^2 / (I * T)
    f_c = (h^H p_c) h / T              f = (h^H p_k) h / I
    log2(u_c) = R_c                    log2(u) = R

and every sample-average is the plain mean over m.
"""

import numpy as np


def _powers(Hk, Pc, Pp, sigma_n2):
    K = Hk.shape[0]
    P_all = np.concatenate([Pc[:, None], Pp], axis=1)      # (Nt, K+1)
    E = np.conj(Hk) @ P_all                                # (K, M, K+1), h^H p_i
    pw = np.abs(E) ** 2
    T = pw[:, :, 1:].sum(axis=2) + sigma_n2                # (K, M)
    idx = np.arange(K)
    S = pw[idx, :, idx + 1]                                # own private power
    I = T - S
    Tc = T + pw[:, :, 0]
    return E, T, S, I, Tc


def sampled_rates(Hk, Pc, Pp, sigma_n2):
    """Per-realization rates (Rc, R), each (K, M)."""
    _, T, _, I, Tc = _powers(Hk, Pc, Pp, sigma_n2)
    return np.log2(Tc / T), np.log2(T / I)


def saf_accumulate(Hk, Pc, Pp, sigma_n2):
    """Fused MMSE equalizer/weight update and sample-average accumulation.

    Returns (Psi_c, Psi, f_c, f, t_c, t, u_c, u, ups_c, ups, Rc_bar, R_bar)
    where matrix/vector entries carry a leading K axis and scalars are
    per-user means over the M realizations.
    """
    K, M, _ = Hk.shape
    E, T, S, I, Tc = _powers(Hk, Pc, Pp, sigma_n2)

    u_c = Tc / T
    u = T / I
    t_c = (Tc - T) / (T * Tc)        # |h^H p_c|^2 / (T * T_c)
    t = S / (I * T)
    Rc = np.log2(u_c)                # log2(u) equals the rate exactly
    R = np.log2(u)

    Hc = np.conj(Hk)
    Psi_c = np.einsum("km,kmi,kmj->kij", t_c, Hk, Hc) / M
    Psi = np.einsum("km,kmi,kmj->kij", t, Hk, Hc) / M
    f_c = np.einsum("km,kmi->ki", E[:, :, 0] / T, Hk) / M
    idx = np.arange(K)
    f = np.einsum("km,kmi->ki", E[idx, :, idx + 1] / I, Hk) / M

    return (
        Psi_c,
        Psi,
        f_c,
        f,
        t_c.mean(axis=1),
        t.mean(axis=1),
        u_c.mean(axis=1),
        u.mean(axis=1),
        Rc.mean(axis=1),
        R.mean(axis=1),
        Rc.mean(axis=1),
        R.mean(axis=1),
    )
