"""Convex precoder-update problem and its interior-point solver.

One problem instance minimizes

    xi_c + sum_k w_k [ sum_i p_i^H Psi_k p_i + sigma_n2 t_k
                       - 2 Re{f_k^H p_k} + u_k - ups_k ]

subject to K common-stream epigraph constraints

    p_c^H Psi_ck p_c + sum_i p_i^H Psi_ck p_i + sigma_n2 t_ck
        - 2 Re{f_ck^H p_c} + u_ck - ups_ck  <=  xi_c

and the power ball ||p_c||^2 + sum_k ||p_k||^2 <= Pt. The NoRS variant
drops the common precoder and the epigraph; the shared-split variant
replaces xi_c with per-user nonnegative splits C_k entering linearly
(objective -sum_k w_k C_k, constraints ... + sum_j C_j <= 1).

Complex variables are embedded into real space by stacking [Re; Im];
Hermitian PSD forms map to symmetric PSD forms. The solver is a dense
Mehrotra predictor-corrector primal-dual interior-point method with
slacked inequalities, so strictly-infeasible starts and empty-interior
corner cases (forced C = 0) still converge to tolerance. Data is
conditioned by the variable substitution p = sqrt(Pt) * p~ (unit power
ball) plus per-row magnitude normalization.
"""

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ratewmmse import Precoder, PrecoderMode
from .saa import SafBundle


class QcqpInputError(ValueError):
    """Malformed problem data (non-PSD quadratic form, bad shapes, NaNs)."""


@dataclass(frozen=True)
class QcqpProblem:
    """Sample-average data defining one precoder update."""

    Psi_c: np.ndarray   # (K, Nt, Nt) Hermitian PSD
    Psi: np.ndarray     # (K, Nt, Nt) Hermitian PSD
    f_c: np.ndarray     # (K, Nt)
    f: np.ndarray       # (K, Nt)
    t_c: np.ndarray     # (K,)
    t: np.ndarray       # (K,)
    u_c: np.ndarray     # (K,)
    u: np.ndarray       # (K,)
    ups_c: np.ndarray   # (K,)
    ups: np.ndarray     # (K,)
    Pt: float
    sigma_n2: float
    mode: PrecoderMode = PrecoderMode.RS
    weights: Optional[np.ndarray] = None      # per-user objective weights
    common_rate_split: bool = False           # shared-split structure

    def __post_init__(self):
        if self.Pt <= 0 or self.sigma_n2 <= 0:
            raise QcqpInputError("Pt and sigma_n2 must be > 0")
        w = np.ones(self.K) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (self.K,) or np.any(w <= 0):
            raise QcqpInputError("weights must be K positive reals")
        object.__setattr__(self, "weights", w)
        if self.common_rate_split and self.mode is not PrecoderMode.RS:
            raise QcqpInputError("common_rate_split requires RS mode")
        for name in ("Psi_c", "Psi"):
            A = getattr(self, name)
            if not np.all(np.isfinite(A)):
                raise QcqpInputError(f"{name} has non-finite entries")
            scale = max(1.0, float(np.abs(A).max()))
            if np.abs(A - A.conj().transpose(0, 2, 1)).max() > 1e-9 * scale:
                raise QcqpInputError(f"{name} is not Hermitian")
            if np.linalg.eigvalsh(A).min() < -1e-9 * scale:
                raise QcqpInputError(f"{name} is not PSD")

    @property
    def K(self) -> int:
        return self.Psi.shape[0]

    @property
    def Nt(self) -> int:
        return self.Psi.shape[1]


@dataclass(frozen=True)
class QcqpSolution:
    P: Precoder
    xi_c: float                 # common epigraph value (0 for NoRS)
    objective: float            # full objective incl. constants
    kkt_residual: float
    duality_gap: float
    lam: np.ndarray             # duals: K common rows [+ K split rows], then ball
    C_split: np.ndarray         # per-user common-rate splits (zeros unless split mode)
    status: str = "optimal"     # "optimal" | "max-iterations"
    iterations: int = 0

    @property
    def certified(self) -> bool:
        return self.status == "optimal"


_LN2 = float(np.log(2.0))
# constant folded into ups so the rescaled surrogate stays tight at the
# generating precoder (value 1 - R there) while majorizing 1 - R globally
_UPS_SHIFT = 1.0 - 1.0 / _LN2


def problem_from_safs(
    saf: SafBundle,
    Pt: float,
    sigma_n2: float,
    mode: PrecoderMode = PrecoderMode.RS,
    weights=None,
    common_rate_split: bool = False,
) -> QcqpProblem:
    """Bridge the sample averages (built with the u = 1/eps convention)
    into consistent update-problem data.

    The bundle's weights drop the 1/ln2 factor of the exact augmented-WMSE
    minimizer, which leaves the surrogate tight at the generating precoder
    but lets it undershoot 1 - R elsewhere. Rescaling the u-proportional
    entries by 1/ln2 and shifting the constants restores a true majorizer
    of 1 - R with the same tight point: the precoder update is unchanged
    in the sum formulations and becomes a proper majorize-minimize step in
    the shared-split one, which is what makes the split constraints carry
    over to the refreshed rates.
    """
    s = 1.0 / _LN2
    return QcqpProblem(
        Psi_c=saf.Psi_c * s, Psi=saf.Psi * s, f_c=saf.f_c * s, f=saf.f * s,
        t_c=saf.t_c * s, t=saf.t * s, u_c=saf.u_c * s, u=saf.u * s,
        ups_c=saf.ups_c - _UPS_SHIFT, ups=saf.ups - _UPS_SHIFT,
        Pt=Pt, sigma_n2=sigma_n2, mode=PrecoderMode(mode),
        weights=weights, common_rate_split=common_rate_split,
    )


# ---------------------------------------------------------------------------
# complex-domain evaluation (shared by tests and the independent KKT check)

def private_wmse_values(prob: QcqpProblem, P: Precoder) -> np.ndarray:
    """Per-user private AWMSE xi_k(P); no common-precoder term (post-SIC)."""
    Pp = P.P_private
    quad = np.einsum("in,kij,jn->k", np.conj(Pp), prob.Psi, Pp).real
    lin = 2.0 * np.real(np.einsum("kn,nk->k", np.conj(prob.f), Pp))
    return quad + prob.sigma_n2 * prob.t - lin + prob.u - prob.ups


def common_wmse_values(prob: QcqpProblem, P: Precoder) -> np.ndarray:
    """Per-user common AWMSE xi_ck(P) (the epigraph constraint left sides)."""
    Pp, pc = P.P_private, P.P_common
    quad_p = np.einsum("in,kij,jn->k", np.conj(Pp), prob.Psi_c, Pp).real
    quad_c = np.einsum("i,kij,j->k", np.conj(pc), prob.Psi_c, pc).real
    lin = 2.0 * np.real(np.conj(prob.f_c) @ pc)
    return quad_c + quad_p + prob.sigma_n2 * prob.t_c - lin + prob.u_c - prob.ups_c


def objective_value(prob: QcqpProblem, P: Precoder, C_split=None) -> float:
    """Full objective at (P, C) for the problem's mode."""
    w = prob.weights
    val = float(w @ private_wmse_values(prob, P))
    if prob.mode is PrecoderMode.NoRS:
        return val
    if prob.common_rate_split:
        C = np.zeros(prob.K) if C_split is None else np.asarray(C_split, dtype=float)
        return val - float(w @ C)
    return val + float(common_wmse_values(prob, P).max())


# ---------------------------------------------------------------------------
# real embedding

def _r_mat(A: np.ndarray) -> np.ndarray:
    """Hermitian form p^H A p as a symmetric form on [Re p; Im p]."""
    Ar, Ai = A.real, A.imag
    return np.block([[Ar, -Ai], [Ai, Ar]])


def _r_vec(v: np.ndarray) -> np.ndarray:
    """Re{v^H p} as a dot product with [Re p; Im p]."""
    return np.concatenate([v.real, v.imag])


@dataclass
class _Stacked:
    """Dense real canonical form min x'Q0x + l0'x + c0 s.t. x'Qx + l'x + c <= 0."""

    Q0: np.ndarray
    l0: np.ndarray
    c0: float
    quads: list                 # list of (Q or None, l, c)
    n: int
    n_blocks: int               # precoder blocks
    mode: PrecoderMode
    split: bool


def _stack_problem(prob: QcqpProblem) -> _Stacked:
    K, Nt = prob.K, prob.Nt
    d = 2 * Nt
    rs = prob.mode is PrecoderMode.RS
    n_blocks = K + 1 if rs else K
    extra = (K if prob.common_rate_split else 1) if rs else 0
    n_p = n_blocks * d
    n = n_p + extra
    w = prob.weights

    def block(i):
        return slice(i * d, (i + 1) * d)

    # objective: every private block shares sum_k w_k Psi_k
    S_obj = _r_mat(np.einsum("k,kij->ij", w, prob.Psi))
    Q0 = np.zeros((n, n))
    l0 = np.zeros(n)
    first_private = 1 if rs else 0
    for i in range(K):
        b = block(first_private + i)
        Q0[b, b] = S_obj
        l0[b] = -2.0 * w[i] * _r_vec(prob.f[i])
    c0 = float(w @ (prob.sigma_n2 * prob.t + prob.u - prob.ups))

    quads = []
    if rs:
        if prob.common_rate_split:
            l0[n_p:] = -w
        else:
            l0[n_p] = 1.0
        for k in range(K):
            Rc = _r_mat(prob.Psi_c[k])
            Qk = np.zeros((n, n))
            for i in range(n_blocks):
                b = block(i)
                Qk[b, b] = Rc
            lk = np.zeros(n)
            lk[:d] += -2.0 * _r_vec(prob.f_c[k])
            ck = float(prob.sigma_n2 * prob.t_c[k] + prob.u_c[k] - prob.ups_c[k])
            if prob.common_rate_split:
                lk[n_p:] = 1.0          # + sum_j C_j
                ck -= 1.0
            else:
                lk[n_p] = -1.0          # - xi_c
            quads.append((Qk, lk, ck))
        if prob.common_rate_split:
            for j in range(K):
                lj = np.zeros(n)
                lj[n_p + j] = -1.0      # C_j >= 0
                quads.append((None, lj, 0.0))
    # power ball over the precoder coordinates only
    Qb = np.zeros((n, n))
    Qb[np.arange(n_p), np.arange(n_p)] = 1.0
    quads.append((Qb, np.zeros(n), -float(prob.Pt)))

    return _Stacked(Q0=Q0, l0=l0, c0=c0, quads=quads, n=n,
                    n_blocks=n_blocks, mode=prob.mode, split=prob.common_rate_split)


def _unstack(prob: QcqpProblem, st: _Stacked, x: np.ndarray):
    Nt = prob.Nt
    d = 2 * Nt
    rs = st.mode is PrecoderMode.RS

    def cplx(i):
        seg = x[i * d : (i + 1) * d]
        return seg[:Nt] + 1j * seg[Nt:]

    if rs:
        pc = cplx(0)
        Pp = np.stack([cplx(1 + i) for i in range(prob.K)], axis=1)
    else:
        pc = np.zeros(Nt, dtype=np.complex128)
        Pp = np.stack([cplx(i) for i in range(prob.K)], axis=1)
    C = x[st.n_blocks * d :] if st.split else np.zeros(prob.K)
    return Precoder(pc, Pp, prob.mode), np.asarray(C, dtype=float)


# ---------------------------------------------------------------------------
# Mehrotra predictor-corrector IPM on the slacked system
#
#   min x'Q0x + l0'x   s.t.  c_i(x) + s_i = 0,  s > 0,  lam > 0

def _ipm(Q0, l0, quads, x0, tol_gap, tol_feas=1e-10, max_iters=100):
    n = l0.shape[0]
    m = len(quads)
    x = x0.copy()

    def c_vals(xv):
        out = np.empty(m)
        for i, (Q, l, c) in enumerate(quads):
            out[i] = (xv @ Q @ xv if Q is not None else 0.0) + l @ xv + c
        return out

    def jac(xv):
        J = np.empty((m, n))
        for i, (Q, l, _) in enumerate(quads):
            J[i] = (2.0 * (Q @ xv) if Q is not None else 0.0) + l
        return J

    c = c_vals(x)
    s = np.maximum(-c, 1e-2)
    lam = np.ones(m)
    data_scale = max(1.0, np.abs(l0).max(), max(abs(q[2]) for q in quads))

    def residual(xv, lv, sv, cv):
        r_d = 2.0 * (Q0 @ xv) + l0 + jac(xv).T @ lv
        r_p = cv + sv
        return max(np.abs(r_p).max(), np.abs(r_d).max() / data_scale), float(sv @ lv)

    best = None
    for it in range(1, max_iters + 1):
        J = jac(x)
        r_d = 2.0 * (Q0 @ x) + l0 + J.T @ lam
        r_p = c + s
        gap = float(s @ lam)
        mu = gap / m

        res = max(np.abs(r_p).max(), np.abs(r_d).max() / data_scale)
        if best is None or max(res, gap) < best[0]:
            best = (max(res, gap), x.copy(), lam.copy(), s.copy(), it)
        if res <= tol_feas and gap <= tol_gap:
            return x, lam, s, it, True

        H = 2.0 * Q0.copy()
        for i, (Q, _, _) in enumerate(quads):
            if Q is not None:
                H += (2.0 * lam[i]) * Q
        M = H + (J.T * (lam / s)) @ J
        m_scale = 1.0 + np.abs(M).max()
        Lf = None
        for reg in (1e-14, 1e-11, 1e-8, 1e-5):
            try:
                Md = M.copy()
                Md[np.diag_indices_from(Md)] += reg * m_scale
                Lf = np.linalg.cholesky(Md)
                break
            except np.linalg.LinAlgError:
                continue
        if Lf is None:
            break  # hopeless conditioning; fall back to the best iterate

        def newton(r_cent):
            rhs = -r_d - J.T @ ((lam * r_p - r_cent) / s)
            dx = np.linalg.solve(Lf.T, np.linalg.solve(Lf, rhs))
            ds = -r_p - J @ dx
            dlam = (-r_cent - lam * ds) / s
            return dx, ds, dlam

        # affine-scaling predictor, then centering + corrector
        dx_a, ds_a, dl_a = newton(lam * s)
        a_a = _step_len(s, ds_a, lam, dl_a)
        mu_aff = float((s + a_a * ds_a) @ (lam + a_a * dl_a)) / m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.1
        dx, ds, dlam = newton(lam * s - sigma * mu + ds_a * dl_a)
        a = _step_len(s, ds, lam, dlam)
        x = x + a * dx
        s = s + a * ds
        lam = lam + a * dlam
        c = c_vals(x)

    _, x, lam, s, it = best
    # active-set Newton polish: resolves degenerate duals (e.g. two
    # nearly identical common rows) that stall the interior iteration
    polished = _polish_active_set(Q0, l0, quads, x, lam, c_vals, jac)
    if polished is not None:
        xp, lp = polished
        cp = c_vals(xp)
        sp = np.maximum(-cp, 0.0)
        res_p, gap_p = residual(xp, lp, sp, cp)
        res_b, gap_b = residual(x, lam, s, c_vals(x))
        if max(res_p, gap_p) < max(res_b, gap_b):
            ok = res_p <= tol_feas and gap_p <= tol_gap
            return xp, lp, sp, it, ok
    return x, lam, s, it, False


def _polish_active_set(Q0, l0, quads, x0, lam0, c_vals, jac, iters=4):
    """Newton on the equality-constrained KKT system of the active set."""
    m = len(quads)
    act = [i for i in range(m) if lam0[i] > max(-c_vals(x0)[i], 1e-9)]
    x = x0.copy()
    lam_a = np.maximum(lam0[act], 0.0) if act else np.zeros(0)
    n = x.shape[0]
    for _ in range(iters):
        J = jac(x)
        H = 2.0 * Q0.copy()
        for idx, i in enumerate(act):
            Q = quads[i][0]
            if Q is not None:
                H += (2.0 * lam_a[idx]) * Q
        grad = 2.0 * (Q0 @ x) + l0 + (J[act].T @ lam_a if act else 0.0)
        ca = c_vals(x)[act]
        na = len(act)
        KKT = np.zeros((n + na, n + na))
        KKT[:n, :n] = H
        KKT[np.diag_indices(n)] += 1e-13 * (1.0 + np.abs(H).max())
        if na:
            KKT[:n, n:] = J[act].T
            KKT[n:, :n] = J[act]
        rhs = -np.concatenate([grad, ca])
        try:
            step = np.linalg.solve(KKT, rhs)
        except np.linalg.LinAlgError:
            return None
        x = x + step[:n]
        lam_a = lam_a + step[n:]
    if act and lam_a.min() < -1e-10:
        return None
    lam = np.zeros(m)
    lam[act] = np.maximum(lam_a, 0.0)
    inactive = np.delete(c_vals(x), act)
    if inactive.size and inactive.max() > 1e-10:
        return None
    return x, lam


def _step_len(s, ds, lam, dlam, frac=0.995):
    a = 1.0
    neg = ds < 0
    if np.any(neg):
        a = min(a, frac * float(np.min(-s[neg] / ds[neg])))
    neg = dlam < 0
    if np.any(neg):
        a = min(a, frac * float(np.min(-lam[neg] / dlam[neg])))
    return max(a, 0.0)


def solve_precoder_update(prob: QcqpProblem, warm_start: Optional[Precoder] = None) -> QcqpSolution:
    """Global optimum of the convex precoder update.

    Raises QcqpInputError for malformed data; an iteration-capped run
    returns the best iterate with status "max-iterations".
    """
    st = _stack_problem(prob)
    d = 2 * prob.Nt
    n_p = st.n_blocks * d
    sp = np.sqrt(prob.Pt)

    # variable scaling x = D x~: sqrt(Pt) on precoder coords, 1 on extras
    Dv = np.ones(st.n)
    Dv[:n_p] = sp
    Q0 = st.Q0 * np.outer(Dv, Dv)
    l0 = st.l0 * Dv
    s0 = max(1.0, np.abs(Q0).max(), np.abs(l0).max())
    Q0 /= s0
    l0 /= s0
    quads = []
    row_scale = []
    for Q, l, c in st.quads:
        Qs = Q * np.outer(Dv, Dv) if Q is not None else None
        ls = l * Dv
        si = max(1.0, np.abs(Qs).max() if Qs is not None else 0.0, np.abs(ls).max(), abs(c))
        quads.append((Qs / si if Qs is not None else None, ls / si, c / si))
        row_scale.append(si)
    row_scale = np.asarray(row_scale)

    x0 = np.zeros(st.n)
    if warm_start is not None:
        x0[:n_p] = _stack_precoder(warm_start, st, prob) / sp
        pw = float(x0[:n_p] @ x0[:n_p])
        if pw > 0.98:                    # restore strict ball feasibility
            x0[:n_p] *= np.sqrt(0.98 / pw)
    if st.mode is PrecoderMode.RS and not st.split:
        # start the epigraph strictly above the common expressions
        vals = [
            (x0 @ Q @ x0 + l @ x0 + c) * si
            for (Q, l, c), si in zip(quads[: prob.K], row_scale[: prob.K])
        ]
        x0[n_p] = max(vals) + 1.0

    tol_gap = max(1e-9 / s0, 2e-14)
    xs, lam_s, _, iters, ok = _ipm(Q0, l0, quads, x0, tol_gap=tol_gap)
    x = xs * Dv
    lam = lam_s * (s0 / row_scale)

    P, C = _unstack(prob, st, x)
    pw = P.total_power
    if pw > prob.Pt:                     # pull a leaked iterate back into the ball
        scale = np.sqrt(prob.Pt / pw)
        P = Precoder(P.P_common * scale, P.P_private * scale, P.mode)
    C = np.maximum(C, 0.0)

    obj = objective_value(prob, P, C)
    xi_c = float(common_wmse_values(prob, P).max()) if prob.mode is PrecoderMode.RS else 0.0
    slack = np.maximum(-_constraint_values(prob, P, C, xi_c), 0.0)
    sol = QcqpSolution(
        P=P, xi_c=xi_c, objective=obj,
        kkt_residual=np.inf, duality_gap=float(lam @ slack), lam=lam, C_split=C,
        status="optimal" if ok else "max-iterations", iterations=iters,
    )
    report = check_kkt(prob, sol)
    object.__setattr__(sol, "kkt_residual", report.max_residual)
    return sol


def _stack_precoder(P: Precoder, st: _Stacked, prob: QcqpProblem) -> np.ndarray:
    cols = []
    if st.mode is PrecoderMode.RS:
        cols.append(P.P_common)
    cols.extend(P.P_private[:, i] for i in range(prob.K))
    return np.concatenate([np.concatenate([c.real, c.imag]) for c in cols])


def _constraint_values(prob: QcqpProblem, P: Precoder, C, xi_c) -> np.ndarray:
    """Constraint values (<= 0) in original units; same row order as lam."""
    rows = []
    if prob.mode is PrecoderMode.RS:
        cv = common_wmse_values(prob, P)
        if prob.common_rate_split:
            rows.extend(cv + np.sum(C) - 1.0)
            rows.extend(-np.asarray(C))
        else:
            rows.extend(cv - xi_c)
    rows.append(P.total_power - prob.Pt)
    return np.asarray(rows, dtype=float)


# ---------------------------------------------------------------------------
# independent KKT verification (complex-domain, no real stacking)

@dataclass(frozen=True)
class KktReport:
    stationarity: float
    primal: float
    dual: float
    comp_slack: float
    max_residual: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "max_residual",
            max(self.stationarity, self.primal, self.dual, self.comp_slack),
        )


def check_kkt(prob: QcqpProblem, sol: QcqpSolution) -> KktReport:
    """Recompute all KKT residuals directly from the complex problem data."""
    P, C, lam = sol.P, sol.C_split, sol.lam
    K = prob.K
    w = prob.weights
    rs = prob.mode is PrecoderMode.RS
    nu = lam[-1]
    lam_c = lam[:K] if rs else np.zeros(0)
    eta = lam[K : 2 * K] if (rs and prob.common_rate_split) else np.zeros(0)

    scale = max(1.0, float(np.abs(prob.f).max()))
    if rs:
        scale = max(scale, float(np.abs(prob.f_c).max()))
    S_obj = np.einsum("k,kij->ij", w, prob.Psi)
    S_com = np.einsum("k,kij->ij", lam_c, prob.Psi_c) if rs else None
    res = 0.0
    for i in range(K):
        g = S_obj @ P.P_private[:, i] - w[i] * prob.f[i] + nu * P.P_private[:, i]
        if rs:
            g = g + S_com @ P.P_private[:, i]
        res = max(res, float(np.abs(g).max()))
    if rs:
        gc = S_com @ P.P_common - np.einsum("k,ki->i", lam_c, prob.f_c) + nu * P.P_common
        res = max(res, float(np.abs(gc).max()))
        if prob.common_rate_split:
            res = max(res, float(np.abs(-w + lam_c.sum() - eta).max()))
        else:
            res = max(res, abs(1.0 - lam_c.sum()))
    stationarity = res / scale

    cons = _constraint_values(prob, P, C, sol.xi_c)
    primal = float(np.max(np.maximum(cons / _row_norms(prob), 0.0)))
    dual = float(max(0.0, -lam.min()))
    comp = float(np.abs(lam * cons).max()) / max(1.0, abs(sol.objective))
    return KktReport(stationarity=stationarity, primal=primal, dual=dual, comp_slack=comp)


def _row_norms(prob: QcqpProblem) -> np.ndarray:
    rows = []
    if prob.mode is PrecoderMode.RS:
        rows.extend(max(1.0, abs(prob.sigma_n2 * prob.t_c[k] + prob.u_c[k] - prob.ups_c[k]))
                    for k in range(prob.K))
        if prob.common_rate_split:
            rows.extend(1.0 for _ in range(prob.K))
    rows.append(max(1.0, prob.Pt))
    return np.asarray(rows)


# ---------------------------------------------------------------------------
# problem dump / reload for offline cross-checks

def dump_problem(prob: QcqpProblem, path) -> None:
    """Self-describing text dump: dimensions, matrices row-major, constants."""
    buf = io.StringIO()
    buf.write("ratesplit-qcqp 1\n")
    buf.write(f"mode {prob.mode.value}\n")
    buf.write(f"K {prob.K}\nNt {prob.Nt}\n")
    buf.write(f"Pt {prob.Pt!r}\nsigma_n2 {prob.sigma_n2!r}\n")
    buf.write(f"common_rate_split {int(prob.common_rate_split)}\n")
    buf.write("weights " + " ".join(repr(float(v)) for v in prob.weights) + "\n")

    def w_cplx(name, arr):
        flat = np.asarray(arr).reshape(-1)
        buf.write(
            name + " " + " ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in flat) + "\n"
        )

    for k in range(prob.K):
        buf.write(f"user {k}\n")
        w_cplx("Psi_c", prob.Psi_c[k])
        w_cplx("Psi", prob.Psi[k])
        w_cplx("f_c", prob.f_c[k])
        w_cplx("f", prob.f[k])
        buf.write(
            "scalars "
            + " ".join(repr(float(v)) for v in (
                prob.t_c[k], prob.t[k], prob.u_c[k], prob.u[k], prob.ups_c[k], prob.ups[k]))
            + "\n"
        )
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_problem(path) -> QcqpProblem:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if lines[0] != "ratesplit-qcqp 1":
        raise QcqpInputError(f"unrecognized dump header: {lines[0]!r}")
    head = dict(ln.split(None, 1) for ln in lines[1:8])
    K, Nt = int(head["K"]), int(head["Nt"])
    weights = np.array([float(v) for v in head["weights"].split()])

    def r_cplx(tok, shape):
        vals = np.array([float(v) for v in tok.split()])
        return (vals[0::2] + 1j * vals[1::2]).reshape(shape)

    Psi_c = np.empty((K, Nt, Nt), dtype=np.complex128)
    Psi = np.empty_like(Psi_c)
    f_c = np.empty((K, Nt), dtype=np.complex128)
    f = np.empty_like(f_c)
    sc = np.empty((K, 6))
    i = 8
    for k in range(K):
        if lines[i] != f"user {k}":
            raise QcqpInputError(f"bad dump structure near line {i}")
        fields = dict(ln.split(None, 1) for ln in lines[i + 1 : i + 6])
        Psi_c[k] = r_cplx(fields["Psi_c"], (Nt, Nt))
        Psi[k] = r_cplx(fields["Psi"], (Nt, Nt))
        f_c[k] = r_cplx(fields["f_c"], (Nt,))
        f[k] = r_cplx(fields["f"], (Nt,))
        sc[k] = [float(v) for v in fields["scalars"].split()]
        i += 6
    return QcqpProblem(
        Psi_c=Psi_c, Psi=Psi, f_c=f_c, f=f,
        t_c=sc[:, 0], t=sc[:, 1], u_c=sc[:, 2], u=sc[:, 3], ups_c=sc[:, 4], ups=sc[:, 5],
        Pt=float(head["Pt"]), sigma_n2=float(head["sigma_n2"]),
        mode=PrecoderMode(head["mode"]), weights=weights,
        common_rate_split=bool(int(head["common_rate_split"])),
    )
