"""Per-realization receive model: powers, SINRs, rates, MSEs, MMSE weights.

For user k with channel h and precoder P = [p_c, p_1, ..., p_K]:

    T_c = |h^H p_c|^2 + T,   T = sum_i |h^H p_i|^2 + sigma_n2
    gamma_c = S_c / T,       gamma = S / I,       I = T - S
    R_c = log2(1 + gamma_c), R = log2(1 + gamma)

The common stream is decoded first treating all private streams as noise,
then cancelled before the private stream is decoded. The augmented
weighted MSE xi = u * eps - log2(u) attains its minimum 1 - R at
g = (p^H h) / T and u = 1 / eps_mmse; the private-stream analogue holds
with (T_c, I_c) replaced by (T, I).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np


class PrecoderMode(str, Enum):
    RS = "RS"
    NoRS = "NoRS"


class IdentityViolationError(AssertionError):
    """The closed-form augmented-WMSE minimum disagreed with 1 - rate."""


@dataclass(frozen=True)
class Precoder:
    """Common + private precoding vectors with an RS/NoRS mode flag."""

    P_common: np.ndarray   # (Nt,)
    P_private: np.ndarray  # (Nt, K)
    mode: PrecoderMode = PrecoderMode.RS

    def __post_init__(self):
        pc = np.asarray(self.P_common, dtype=np.complex128).reshape(-1)
        pp = np.asarray(self.P_private, dtype=np.complex128)
        if pp.ndim != 2 or pp.shape[0] != pc.shape[0]:
            raise ValueError("P_private must be Nt x K with Nt matching P_common")
        object.__setattr__(self, "P_common", pc)
        object.__setattr__(self, "P_private", pp)
        mode = PrecoderMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is PrecoderMode.NoRS and np.linalg.norm(pc) > 0:
            raise ValueError("NoRS precoder must carry zero common power")
        pc.setflags(write=False)
        pp.setflags(write=False)

    @property
    def Nt(self) -> int:
        return self.P_common.shape[0]

    @property
    def K(self) -> int:
        return self.P_private.shape[1]

    @property
    def total_power(self) -> float:
        return float(np.linalg.norm(self.P_common) ** 2 + np.linalg.norm(self.P_private) ** 2)

    def is_feasible(self, Pt: float, rtol: float = 1e-9) -> bool:
        return self.total_power <= Pt * (1.0 + rtol)

    @staticmethod
    def zeros(Nt: int, K: int, mode: PrecoderMode = PrecoderMode.RS) -> "Precoder":
        return Precoder(np.zeros(Nt, dtype=np.complex128), np.zeros((Nt, K), dtype=np.complex128), mode)


@dataclass(frozen=True)
class LinkPowers:
    """Receive-power split for one user at one channel state."""

    S_c: float  # common signal power
    S: float    # private signal power
    I: float    # private interference + noise
    I_c: float  # common interference + noise (= T)
    T: float    # total private receive power
    T_c: float  # total receive power


@dataclass(frozen=True)
class EqualizerWeightPair:
    """Scalar MMSE equalizers and the matching augmented-WMSE weights."""

    g_c: complex
    g: complex
    u_c: float
    u: float


def link_powers(h: np.ndarray, precoder: Precoder, user: int, sigma_n2: float) -> LinkPowers:
    """Receive powers at `user` whose channel is h."""
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be > 0")
    h = np.asarray(h).reshape(-1)
    if h.shape[0] != precoder.Nt:
        raise ValueError("channel/precoder dimension mismatch")
    a = np.conj(h) @ precoder.P_private          # h^H p_i for all i
    S = float(np.abs(a[user]) ** 2)
    T = float(np.sum(np.abs(a) ** 2) + sigma_n2)
    S_c = float(np.abs(np.conj(h) @ precoder.P_common) ** 2)
    I = T - S
    return LinkPowers(S_c=S_c, S=S, I=I, I_c=T, T=T, T_c=S_c + T)


def sinr_and_rate(lp: LinkPowers):
    """(gamma_c, gamma, R_c, R) from the receive-power split."""
    gamma_c = lp.S_c / lp.I_c
    gamma = lp.S / lp.I
    return gamma_c, gamma, np.log2(1.0 + gamma_c), np.log2(1.0 + gamma)


def mmse_equalizers(h: np.ndarray, precoder: Precoder, user: int, sigma_n2: float):
    """Closed-form MMSE equalizers (g_c, g) = (p_c^H h / T_c, p_k^H h / T)."""
    h = np.asarray(h).reshape(-1)
    lp = link_powers(h, precoder, user, sigma_n2)
    g_c = complex(np.vdot(precoder.P_common, h) / lp.T_c)
    g = complex(np.vdot(precoder.P_private[:, user], h) / lp.T)
    return g_c, g


def mmse_pair(h: np.ndarray, precoder: Precoder, user: int, sigma_n2: float) -> EqualizerWeightPair:
    """MMSE equalizers plus the optimum weights u = 1 / eps_mmse."""
    lp = link_powers(h, precoder, user, sigma_n2)
    g_c, g = mmse_equalizers(h, precoder, user, sigma_n2)
    return EqualizerWeightPair(g_c=g_c, g=g, u_c=lp.T_c / lp.I_c, u=lp.T / lp.I)


def mse(lp: LinkPowers, g: complex, hp: complex) -> float:
    """eps(g) = |g|^2 T - 2 Re{g * h^H p} + 1 for a receive power T."""
    return float(abs(g) ** 2 * lp.T - 2.0 * np.real(g * hp) + 1.0)


def augmented_wmse(u: float, eps: float) -> float:
    """xi(u, eps) = u * eps - log2(u)."""
    return float(u * eps - np.log2(u))


def rate_wmmse_identity_check(
    h: np.ndarray, precoder: Precoder, sigma_n2: float, user: int = 0, tol: float = 1e-9
):
    """Minimum augmented WMSEs via the closed forms, checked against 1 - rate.

    Returns (xi_c_min, xi_min). Raises IdentityViolationError when either
    stream's minimum deviates from 1 - R by more than tol.
    """
    h = np.asarray(h).reshape(-1)
    lp = link_powers(h, precoder, user, sigma_n2)
    _, _, R_c, R = sinr_and_rate(lp)

    eps_c = lp.I_c / lp.T_c
    eps = lp.I / lp.T
    xi_c_min = augmented_wmse(1.0 / eps_c, eps_c)
    xi_min = augmented_wmse(1.0 / eps, eps)

    err_c = abs(xi_c_min - (1.0 - R_c))
    err = abs(xi_min - (1.0 - R))
    if max(err_c, err) > tol:
        # diagnostics only; the optimization path never clamps
        eps_c_d, eps_d = max(eps_c, 1e-300), max(eps, 1e-300)
        raise IdentityViolationError(
            f"augmented-WMSE identity violated: |xi_c-(1-R_c)|={err_c:.3e}, "
            f"|xi-(1-R)|={err:.3e} (eps_c={eps_c_d:.3e}, eps={eps_d:.3e})"
        )
    return xi_c_min, xi_min
