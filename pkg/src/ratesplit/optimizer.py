"""Alternating-optimization drivers.

Each iteration refreshes the closed-form MMSE equalizers/weights (per
conditional realization, or once per user in the conservative variant),
accumulates their sample averages, and solves the convex precoder-update
QCQP. Convergence is declared on the augmented-WMSE objective measured at
the refreshed point, which equals K + 1 - (sampled sum rate) for the RS
problem; the sequence is non-increasing because every step is an exact
block minimization.
"""

import csv
import time
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .channel import ChannelEstimate, ConditionalSample, sample_conditional
from .config import SystemConfig
from .qcqp import (
    QcqpProblem,
    objective_value,
    problem_from_safs,
    solve_precoder_update,
)
from .ratewmmse import Precoder, PrecoderMode
from .saa import SafBundle, compute_safs


class NonMonotonicObjectiveError(AssertionError):
    """The AO objective increased beyond numerical slack (implementation bug)."""


_MONOTONE_SLACK = 1e-8


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    objective: float
    asr: float
    status: str
    wall_time: float


@dataclass(frozen=True)
class AoTrace:
    rows: tuple

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.rows])

    @property
    def n_iterations(self) -> int:
        return len(self.rows) - 1 if self.rows else 0

    @property
    def converged(self) -> bool:
        return bool(self.rows) and self.rows[-1].status in ("converged", "optimal")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective", "asr", "status"])
            for r in self.rows:
                w.writerow([r.iteration, f"{r.objective:.12g}", f"{r.asr:.12g}", r.status])


@dataclass(frozen=True)
class AsrResult:
    """Converged precoder with its sampled (or conservative) rates."""

    P_opt: Precoder
    R_bar: np.ndarray          # per-user private average rates
    Rc_bar_users: np.ndarray   # per-user common average rates
    Rc_bar: float              # min over users (0 in NoRS mode)
    asr: float                 # reported objective (weighted: sum w_k (R_k + C_k))
    common_split: np.ndarray   # per-user common-rate shares (weighted mode only)
    trace: AoTrace
    mode: PrecoderMode
    weights: Optional[np.ndarray] = None

    @property
    def sum_rate(self) -> float:
        return float(self.Rc_bar + self.R_bar.sum())


def _prepare_init(init: Precoder, cfg: SystemConfig, mode: PrecoderMode) -> Precoder:
    if init.Nt != cfg.Nt or init.K != cfg.K:
        raise ValueError("init precoder does not match the configuration size")
    if mode is PrecoderMode.NoRS and np.linalg.norm(init.P_common) > 0:
        init = Precoder(np.zeros(cfg.Nt, dtype=np.complex128), init.P_private, mode)
    elif init.mode is not mode:
        init = Precoder(init.P_common, init.P_private, mode)
    if not init.is_feasible(cfg.Pt):
        raise ValueError(f"init precoder power {init.total_power:.6g} exceeds Pt={cfg.Pt:.6g}")
    return init


def _ao_loop(cfg: SystemConfig, init: Precoder, mode: PrecoderMode, bundle_at,
             weights=None, split: bool = False) -> AsrResult:
    """Generic AO: bundle_at(P) supplies the SAF bundle at a precoder."""
    K = cfg.K
    w = np.ones(K) if weights is None else np.asarray(weights, dtype=float)
    rs = mode is PrecoderMode.RS
    P = init
    C = np.zeros(K)
    t0 = time.perf_counter()
    rows = []
    prev_A = None
    status = "max-iterations"
    last_prob = None

    for n in range(cfg.max_iters + 1):
        saf = bundle_at(P)
        if split:
            A = float(w @ (1.0 - saf.R_bar) - w @ C)
        elif rs:
            A = float(K + 1.0 - (saf.Rc_bar.min() + saf.R_bar.sum()))
        else:
            A = float(w @ (1.0 - saf.R_bar))
        asr = _reported_objective(saf, C, w, mode, split)
        rows.append(TraceRow(n, A, asr, "running", time.perf_counter() - t0))

        if prev_A is not None:
            if A > prev_A + _MONOTONE_SLACK:
                raise NonMonotonicObjectiveError(
                    f"objective rose from {prev_A:.12g} to {A:.12g} at iteration {n}"
                )
            if abs(A - prev_A) < cfg.eps_R:
                status = "converged"
                break
        prev_A = A
        if n == cfg.max_iters:
            break

        prob = problem_from_safs(saf, cfg.Pt, cfg.sigma_n2, mode=mode,
                                 weights=None if weights is None else w,
                                 common_rate_split=split)
        last_prob = prob
        sol = solve_precoder_update(prob, warm_start=P)
        # numerical backstop: never accept a non-improving precoder
        obj_old = objective_value(prob, P, C if split else None)
        if sol.objective > obj_old:
            status = "stalled"
            break
        if not sol.certified:
            warnings.warn("precoder update not certified; keeping best iterate")
        P = sol.P
        C = sol.C_split

    rows[-1] = replace(rows[-1], status=status)
    saf = bundle_at(P)
    if last_prob is not None:
        _check_equivalence(saf, P, C, w, mode, split, cfg)

    Rc_users = saf.Rc_bar if rs else np.zeros(K)
    Rc = float(Rc_users.min()) if rs else 0.0
    if split:
        tol = 1e-7
        if np.any(C < -tol) or C.sum() > Rc + tol:
            raise NonMonotonicObjectiveError(
                f"common-rate split infeasible: C={C}, min Rc_bar={Rc:.12g}"
            )
    return AsrResult(
        P_opt=P,
        R_bar=saf.R_bar.copy(),
        Rc_bar_users=Rc_users.copy(),
        Rc_bar=Rc,
        asr=_reported_objective(saf, C, w, mode, split),
        common_split=C.copy(),
        trace=AoTrace(rows=tuple(rows)),
        mode=mode,
        weights=None if weights is None else w.copy(),
    )


def _reported_objective(saf: SafBundle, C, w, mode, split) -> float:
    if split:
        return float(w @ (saf.R_bar + C))
    if mode is PrecoderMode.RS:
        return float(saf.Rc_bar.min() + saf.R_bar.sum())
    return float(w @ saf.R_bar)


def _check_equivalence(saf, P, C, w, mode, split, cfg, tol=1e-7):
    """QCQP objective rebuilt at the refreshed point must match the
    affine function of the sampled rates (the WMMSE equivalence)."""
    prob = problem_from_safs(saf, cfg.Pt, cfg.sigma_n2, mode=mode,
                             weights=w, common_rate_split=split)
    direct = objective_value(prob, P, C if split else None)
    if split:
        via_rates = float(w @ (1.0 - saf.R_bar) - w @ C)
    elif mode is PrecoderMode.RS:
        via_rates = float(saf.K + 1.0 - (saf.Rc_bar.min() + saf.R_bar.sum()))
    else:
        via_rates = float(w @ (1.0 - saf.R_bar))
    scale = max(1.0, abs(via_rates), float(np.abs(saf.u).max()) * 1e-6)
    if abs(direct - via_rates) > tol * scale:
        raise NonMonotonicObjectiveError(
            f"rate/WMSE bookkeeping mismatch: {direct:.12g} vs {via_rates:.12g}"
        )


# ---------------------------------------------------------------------------
# public solvers

def ao_solve(
    est: ChannelEstimate,
    cfg: SystemConfig,
    init: Precoder,
    mode: PrecoderMode = PrecoderMode.RS,
    sample: Optional[ConditionalSample] = None,
    rng: Optional[np.random.Generator] = None,
    safeguard: bool = True,
    nors_result: Optional[AsrResult] = None,
) -> AsrResult:
    """Sample-average AO for the (restricted) sum-rate problem.

    The conditional sample may be passed explicitly (matched-sample
    comparisons); otherwise it is drawn from cfg.seed.

    RS mode is safeguarded by default: the limit point of the matched
    NoRS restriction is also a fixed point of the RS iteration, so when
    the RS run lands below it (distinct KKT points of the non-convex
    problem) the restriction is adopted. Pass nors_result to reuse an
    already-computed matched NoRS solve, or safeguard=False for the
    plain single-start iteration.
    """
    mode = PrecoderMode(mode)
    init = _prepare_init(init, cfg, mode)
    if sample is None:
        rng = rng or np.random.default_rng(cfg.seed)
        sample = sample_conditional(est, cfg.M, rng)
    bundle_at = lambda P: compute_safs(sample, P, cfg.sigma_n2)  # noqa: E731
    res = _ao_loop(cfg, init, mode, bundle_at)
    if mode is PrecoderMode.RS and safeguard:
        if nors_result is None:
            nors_result = _ao_loop(cfg, _prepare_init(init, cfg, PrecoderMode.NoRS),
                                   PrecoderMode.NoRS, bundle_at)
        if nors_result.asr > res.asr:
            restricted = Precoder(
                np.zeros(cfg.Nt, dtype=np.complex128),
                nors_result.P_opt.P_private,
                PrecoderMode.RS,
            )
            res = _ao_loop(cfg, restricted, PrecoderMode.RS, bundle_at)
    return res


def weighted_asr_solve(
    est: ChannelEstimate,
    cfg: SystemConfig,
    init: Precoder,
    weights,
    mode: PrecoderMode = PrecoderMode.RS,
    sample: Optional[ConditionalSample] = None,
    rng: Optional[np.random.Generator] = None,
    safeguard: bool = True,
    nors_result: Optional[AsrResult] = None,
) -> AsrResult:
    """Weighted ASR with the common rate shared through nonnegative
    per-user splits (RS mode) or dropped entirely (NoRS mode).

    RS mode carries the same matched-restriction safeguard as ao_solve.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (cfg.K,) or np.any(w <= 0):
        raise ValueError("weights must be K positive reals")
    mode = PrecoderMode(mode)
    init = _prepare_init(init, cfg, mode)
    if sample is None:
        rng = rng or np.random.default_rng(cfg.seed)
        sample = sample_conditional(est, cfg.M, rng)
    bundle_at = lambda P: compute_safs(sample, P, cfg.sigma_n2)  # noqa: E731
    res = _ao_loop(cfg, init, mode, bundle_at, weights=w, split=(mode is PrecoderMode.RS))
    if mode is PrecoderMode.RS and safeguard:
        if nors_result is None:
            nors_result = _ao_loop(cfg, _prepare_init(init, cfg, PrecoderMode.NoRS),
                                   PrecoderMode.NoRS, bundle_at, weights=w, split=False)
        if nors_result.asr > res.asr:
            restricted = Precoder(
                np.zeros(cfg.Nt, dtype=np.complex128),
                nors_result.P_opt.P_private,
                PrecoderMode.RS,
            )
            res = _ao_loop(cfg, restricted, PrecoderMode.RS, bundle_at, weights=w, split=True)
    return res


def conservative_solve(
    est: ChannelEstimate,
    cfg: SystemConfig,
    init: Precoder,
    mode: PrecoderMode = PrecoderMode.RS,
) -> AsrResult:
    """AO on the closed-form conservative average WMSEs (no sampling).

    Equalizers and weights depend on the estimate only; the isotropic
    error covariance sigma_e2 * I adds self-terms to the receive powers.
    The returned rates are the conservative (guaranteed) ones.
    """
    mode = PrecoderMode(mode)
    init = _prepare_init(init, cfg, mode)
    return _ao_loop(cfg, init, mode,
                    lambda P: conservative_bundle(est, P, cfg.sigma_n2))


def conservative_bundle(est: ChannelEstimate, P: Precoder, sigma_n2: float) -> SafBundle:
    """Closed-form analogue of the sample-average bundle at a precoder.

    With Phi_k = h_k h_k^H + sigma_e2 I, the relaxed receive powers are
    T_k = sum_i p_i^H Phi_k p_i + sigma_n2 and T_ck = T_k + p_c^H Phi_k p_c;
    the relaxed MMSEs are eps_k = 1 - |h_k^H p_k|^2 / T_k (common stream
    analogous) and all bundle entries follow the same algebra as the
    sampled ones with (h, T, I) replaced by their relaxed versions.
    """
    H = est.H_hat                                  # (Nt, K)
    Nt = H.shape[0]
    se2 = est.sigma_e2
    Phi = np.einsum("ik,jk->kij", H, H.conj())     # h_k h_k^H per user
    Phi = Phi + se2 * np.eye(Nt)[None, :, :]

    a = np.conj(H).T @ P.P_private                 # a[k, i] = h_k^H p_i
    ac = np.conj(H).T @ P.P_common                 # (K,)
    quad_p = np.einsum("in,kij,jn->k", np.conj(P.P_private), Phi, P.P_private).real
    quad_c = np.einsum("i,kij,j->k", np.conj(P.P_common), Phi, P.P_common).real
    T = quad_p + sigma_n2
    Tc = T + quad_c
    S = np.abs(np.diag(a)) ** 2
    Sc = np.abs(ac) ** 2
    I = T - S                                      # keeps the self term se2*||p_k||^2
    Ic = Tc - Sc

    u = T / I
    u_c = Tc / Ic
    t = S / (I * T)
    t_c = Sc / (Ic * Tc)
    R = np.log2(u)
    Rc = np.log2(u_c)
    f = (np.diag(a) / I)[:, None] * H.T            # u * conj(g) * h = a_k h / I
    f_c = (ac / Ic)[:, None] * H.T

    return SafBundle(
        Psi_c=t_c[:, None, None] * Phi,
        Psi=t[:, None, None] * Phi,
        f_c=f_c,
        f=f,
        t_c=t_c, t=t, u_c=u_c, u=u,
        ups_c=Rc, ups=R, Rc_bar=Rc, R_bar=R,
    )
