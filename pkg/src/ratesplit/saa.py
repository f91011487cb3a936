"""Sample-average machinery: per-realization equalizers/weights and the
averaged quantities (Psi, f, t, u, ups) that parameterize the precoder
update problem.

`update_equalizers_weights` and `accumulate_safs` are the two reference
steps; `compute_safs` fuses them through the selected kernel backend and
is what the optimizer calls each iteration.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .channel import ConditionalSample
from .ratewmmse import Precoder


@dataclass(frozen=True)
class SampledEqualizers:
    """MMSE equalizers and weights for every (user, realization) pair."""

    g_c: np.ndarray  # (K, M) complex
    g: np.ndarray    # (K, M) complex
    u_c: np.ndarray  # (K, M) real
    u: np.ndarray    # (K, M) real


@dataclass(frozen=True)
class SafBundle:
    """Per-user sample-average quantities feeding the precoder QCQP.

    Matrix entries carry a leading user axis: Psi_c/Psi are (K, Nt, Nt)
    Hermitian PSD, f_c/f are (K, Nt), the rest are (K,) scalars. Rc_bar
    and R_bar are the sampled average rates at the generating precoder.
    """

    Psi_c: np.ndarray
    Psi: np.ndarray
    f_c: np.ndarray
    f: np.ndarray
    t_c: np.ndarray
    t: np.ndarray
    u_c: np.ndarray
    u: np.ndarray
    ups_c: np.ndarray
    ups: np.ndarray
    Rc_bar: np.ndarray
    R_bar: np.ndarray

    @property
    def K(self) -> int:
        return self.Psi.shape[0]

    @property
    def Nt(self) -> int:
        return self.Psi.shape[1]


def update_equalizers_weights(
    sample: ConditionalSample, precoder: Precoder, sigma_n2: float
) -> SampledEqualizers:
    """Closed-form MMSE equalizers and weights on every realization."""
    Hk = sample.per_user                                   # (K, M, Nt)
    K = Hk.shape[0]
    P_all = np.concatenate([precoder.P_common[:, None], precoder.P_private], axis=1)
    E = np.conj(Hk) @ P_all                                # h^H p_i
    pw = np.abs(E) ** 2
    T = pw[:, :, 1:].sum(axis=2) + sigma_n2
    idx = np.arange(K)
    S = pw[idx, :, idx + 1]
    I = T - S
    Tc = T + pw[:, :, 0]
    # g = p^H h / T = conj(h^H p) / T
    return SampledEqualizers(
        g_c=np.conj(E[:, :, 0]) / Tc,
        g=np.conj(E[idx, :, idx + 1]) / T,
        u_c=Tc / T,
        u=T / I,
    )


def accumulate_safs(sample: ConditionalSample, eq: SampledEqualizers) -> SafBundle:
    """Arithmetic means over m of t = u|g|^2, Psi = t h h^H, f = u h g^H,
    ups = log2(u), plus the means of u themselves."""
    Hk = sample.per_user
    M = Hk.shape[1]
    Hc = np.conj(Hk)

    t_c = eq.u_c * np.abs(eq.g_c) ** 2
    t = eq.u * np.abs(eq.g) ** 2
    Psi_c = np.einsum("km,kmi,kmj->kij", t_c, Hk, Hc) / M
    Psi = np.einsum("km,kmi,kmj->kij", t, Hk, Hc) / M
    f_c = np.einsum("km,kmi->ki", eq.u_c * np.conj(eq.g_c), Hk) / M
    f = np.einsum("km,kmi->ki", eq.u * np.conj(eq.g), Hk) / M
    ups_c = np.log2(eq.u_c).mean(axis=1)
    ups = np.log2(eq.u).mean(axis=1)
    # u = 1/eps_mmse makes log2(u) the per-realization rate
    return SafBundle(
        Psi_c=Psi_c,
        Psi=Psi,
        f_c=f_c,
        f=f,
        t_c=t_c.mean(axis=1),
        t=t.mean(axis=1),
        u_c=eq.u_c.mean(axis=1),
        u=eq.u.mean(axis=1),
        ups_c=ups_c,
        ups=ups,
        Rc_bar=ups_c,
        R_bar=ups,
    )


def compute_safs(sample: ConditionalSample, precoder: Precoder, sigma_n2: float) -> SafBundle:
    """Fused equalizer update + accumulation via the kernel backend."""
    out = backend.saf_accumulate(
        sample.per_user, precoder.P_common, precoder.P_private, float(sigma_n2)
    )
    return SafBundle(*out)


def sample_average_rates(sample: ConditionalSample, precoder: Precoder, sigma_n2: float):
    """Sampled average rates (Rc_bar, R_bar), each (K,), at a fixed precoder."""
    Rc, R = backend.sampled_rates(
        sample.per_user, precoder.P_common, precoder.P_private, float(sigma_n2)
    )
    return Rc.mean(axis=1), R.mean(axis=1)


def per_realization_rates(sample: ConditionalSample, precoder: Precoder, sigma_n2: float):
    """Per-realization rates (Rc, R), each (K, M); used by validation."""
    return backend.sampled_rates(
        sample.per_user, precoder.P_common, precoder.P_private, float(sigma_n2)
    )
