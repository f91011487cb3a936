"""Monte-Carlo evaluation over channel estimates.

Ergodic quantities average per-estimate results over a pool of normalized
channels that is reused across SNR points, which keeps the curves smooth
and lets matched comparisons (RS vs NoRS, conservative vs sampled) share
randomness. Validation rates are measured on an independent large sample;
the achievable common rate takes the min over users of the per-user
validated common average rate before averaging over estimates.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .baselines import InitScheme, init_precoder, nors_zf_wf, rs_zf_svd_baseline
from .channel import ConditionalSample, ScenarioPool
from .config import SystemConfig
from .optimizer import ao_solve, conservative_solve, weighted_asr_solve
from .ratewmmse import Precoder, PrecoderMode
from .saa import per_realization_rates, sample_average_rates

SCHEMES = ("RS-Opt", "NoRS-Opt", "NoRS-ZF", "RS-ZF-SVD", "Conservative-RS")

_FLOAT_FMT = "%.12g"


@dataclass(frozen=True)
class EsrPoint:
    scheme: str
    snr_db: float
    esr: float
    stderr: float
    n_channels: int
    per_user: np.ndarray = field(default=None, repr=False)   # mean private ARs
    common: float = 0.0                                      # mean common AR
    n_failed: int = 0                                        # iteration-capped solves


@dataclass(frozen=True)
class RegionPoint:
    scheme: str
    w1: float
    w2: float
    er1: float
    er2: float


@dataclass(frozen=True)
class HarnessSettings:
    """Desk-scale evaluation knobs (the reference experiments use 100
    channels and M = 1000; these defaults trade accuracy for runtime)."""

    n_channels: int = 20
    m_val: int = 10000
    init_scheme: InitScheme = InitScheme.MRC_SVD
    jobs: int = 1


def _worker_pool(settings: HarnessSettings, cfg: SystemConfig, need_val: bool) -> ScenarioPool:
    return ScenarioPool(
        seed=cfg.seed, Nt=cfg.Nt, K=cfg.K,
        n_channels=settings.n_channels, M=cfg.M,
        M_val=settings.m_val if need_val else 0,
    )


def _solve_scheme(scheme: str, cfg: SystemConfig, pool: ScenarioPool, index: int,
                  init_scheme: InitScheme):
    """One (scheme, SNR, channel) cell: (asr, per_user_private, common, converged)."""
    est = pool.estimate(index, cfg)
    sample = pool.conditional_sample(index, cfg)
    if scheme == "RS-Opt":
        init = init_precoder(est, cfg, init_scheme, PrecoderMode.RS)
        res = ao_solve(est, cfg, init, PrecoderMode.RS, sample=sample)
        return res.asr, res.R_bar, res.Rc_bar, _converged(res)
    if scheme == "NoRS-Opt":
        init = init_precoder(est, cfg, init_scheme, PrecoderMode.NoRS)
        res = ao_solve(est, cfg, init, PrecoderMode.NoRS, sample=sample)
        return res.asr, res.R_bar, 0.0, _converged(res)
    if scheme == "NoRS-ZF":
        P, _ = nors_zf_wf(est, cfg)
        _, R = sample_average_rates(sample, P, cfg.sigma_n2)
        return float(R.sum()), R, 0.0, True
    if scheme == "RS-ZF-SVD":
        P = rs_zf_svd_baseline(est, cfg)
        Rc, R = sample_average_rates(sample, P, cfg.sigma_n2)
        return float(Rc.min() + R.sum()), R, float(Rc.min()), True
    if scheme == "Conservative-RS":
        init = init_precoder(est, cfg, init_scheme, PrecoderMode.RS)
        res = conservative_solve(est, cfg, init)
        return res.asr, res.R_bar, res.Rc_bar, _converged(res)
    raise ValueError(f"unknown scheme {scheme!r}")


def _converged(res) -> bool:
    return res.trace.rows[-1].status != "max-iterations"


_POOL_CACHE: dict = {}


def _cached_pool(settings: HarnessSettings, cfg: SystemConfig, need_val: bool) -> ScenarioPool:
    key = (cfg.seed, cfg.Nt, cfg.K, settings.n_channels, cfg.M,
           settings.m_val if need_val else 0)
    pool = _POOL_CACHE.get(key)
    if pool is None:
        pool = _worker_pool(settings, cfg, need_val)
        _POOL_CACHE.clear()
        _POOL_CACHE[key] = pool
    return pool


def _esr_job(args):
    scheme, snr_db, index, cfg, settings = args
    cfg_snr = cfg.at_snr_db(snr_db)
    pool = _cached_pool(settings, cfg, need_val=False)
    return _solve_scheme(scheme, cfg_snr, pool, index, settings.init_scheme)


def _run_jobs(fn, job_args, jobs: int):
    if jobs <= 1:
        return [fn(a) for a in job_args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, job_args))


def esr_sweep(
    cfg: SystemConfig,
    snr_grid_db: Sequence[float],
    schemes: Sequence[str] = SCHEMES,
    settings: Optional[HarnessSettings] = None,
) -> list:
    """ESR per (scheme, SNR): ASRs averaged over the channel pool."""
    settings = settings or HarnessSettings()
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}; valid: {SCHEMES}")
    n = settings.n_channels
    jobs = [
        (scheme, float(snr), i, cfg, settings)
        for scheme in schemes for snr in snr_grid_db for i in range(n)
    ]
    results = _run_jobs(_esr_job, jobs, settings.jobs)
    points = []
    pos = 0
    for scheme in schemes:
        for snr in snr_grid_db:
            cell = results[pos : pos + n]
            pos += n
            asr = np.array([c[0] for c in cell])
            per_user = np.mean([c[1] for c in cell], axis=0)
            common = float(np.mean([c[2] for c in cell]))
            points.append(EsrPoint(
                scheme=scheme, snr_db=float(snr), esr=float(asr.mean()),
                stderr=float(asr.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                n_channels=n, per_user=per_user, common=common,
                n_failed=sum(1 for c in cell if not c[3]),
            ))
    return points


def dof_slope(points: Sequence[EsrPoint], window_db) -> float:
    """Least-squares slope of ESR versus log2(Pt) inside the dB window."""
    lo, hi = window_db
    sel = [p for p in points if lo - 1e-9 <= p.snr_db <= hi + 1e-9]
    if len(sel) < 3:
        raise ValueError(f"need >= 3 points in window, got {len(sel)}")
    x = np.array([p.snr_db for p in sel]) * (np.log2(10.0) / 10.0)
    y = np.array([p.esr for p in sel])
    return float(np.polyfit(x, y, 1)[0])


def validated_rates(pool: ScenarioPool, index: int, cfg: SystemConfig, P: Precoder):
    """Validation-sample average rates and their Monte-Carlo standard errors.

    Returns (Rc_bar, R_bar, se_c, se) over the pool's validation sample.
    """
    vs = pool.validation_sample(index, cfg)
    Rc, R = per_realization_rates(vs, P, cfg.sigma_n2)
    m = Rc.shape[1]
    return (
        Rc.mean(axis=1), R.mean(axis=1),
        Rc.std(axis=1, ddof=1) / np.sqrt(m), R.std(axis=1, ddof=1) / np.sqrt(m),
    )


def _msweep_job(args):
    m, snr_db, index, cfg, settings = args
    cfg_m = replace(cfg, M=int(m)).at_snr_db(snr_db)
    pool = _cached_pool(settings, cfg, need_val=True)
    est = pool.estimate(index, cfg_m)
    # nested subsamples: the first m normalized error draws of the pool
    sub = ConditionalSample(
        realizations=pool.conditional_sample(index, cfg_m).realizations[: int(m)].copy()
    )
    init = init_precoder(est, cfg_m, settings.init_scheme, PrecoderMode.RS)
    res = ao_solve(est, cfg_m, init, PrecoderMode.RS, sample=sub)
    Rc_val, R_val, _, _ = validated_rates(pool, index, cfg_m, res.P_opt)
    return float(Rc_val.min() + R_val.sum())


def m_sensitivity(
    cfg: SystemConfig,
    m_list: Sequence[int],
    snr_db: float,
    settings: Optional[HarnessSettings] = None,
) -> list:
    """Optimize with each sample size, then score on an independent large
    validation sample (achievable ESR with the min-over-users common rule)."""
    settings = settings or HarnessSettings()
    if not m_list:
        raise ValueError("m_list must be nonempty")
    cfg = replace(cfg, M=max(int(m) for m in m_list))
    n = settings.n_channels
    jobs = [(m, float(snr_db), i, cfg, settings) for m in m_list for i in range(n)]
    results = _run_jobs(_msweep_job, jobs, settings.jobs)
    points = []
    pos = 0
    for m in m_list:
        vals = np.array(results[pos : pos + n])
        pos += n
        points.append(EsrPoint(
            scheme=f"RS-Opt[M={int(m)}]", snr_db=float(snr_db),
            esr=float(vals.mean()),
            stderr=float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
            n_channels=n,
        ))
    return points


def paper_weight_pairs() -> list:
    """The 43 weight pairs sweeping the two-user region boundary."""
    w2 = [1e-3] + [10.0 ** e for e in np.arange(-1.0, 1.0 + 1e-12, 0.05)] + [1e3]
    return [(1.0, float(v)) for v in w2]


def _region_job(args):
    w1, w2, index, cfg, settings = args
    pool = _cached_pool(settings, cfg, need_val=False)
    est = pool.estimate(index, cfg)
    sample = pool.conditional_sample(index, cfg)
    w = np.array([w1, w2])
    init_rs = init_precoder(est, cfg, settings.init_scheme, PrecoderMode.RS)
    init_no = init_precoder(est, cfg, settings.init_scheme, PrecoderMode.NoRS)
    res_no = weighted_asr_solve(est, cfg, init_no, w, mode=PrecoderMode.NoRS, sample=sample)
    res_rs = weighted_asr_solve(est, cfg, init_rs, w, mode=PrecoderMode.RS,
                                sample=sample, nors_result=res_no)
    rs_tot = res_rs.R_bar + res_rs.common_split
    return rs_tot[0], rs_tot[1], res_no.R_bar[0], res_no.R_bar[1]


def rate_region(
    cfg: SystemConfig,
    weight_pairs: Optional[Sequence] = None,
    settings: Optional[HarnessSettings] = None,
) -> list:
    """Two-user ergodic-rate region points for RS and NoRS.

    Per weight pair and channel, the weighted solvers run on matched
    samples; per-user totals (private + common share for RS) are averaged
    over the pool. Returns RegionPoint rows for both schemes.
    """
    settings = settings or HarnessSettings()
    if cfg.K != 2:
        raise ValueError("the region experiment is defined for K = 2")
    pairs = list(weight_pairs) if weight_pairs is not None else paper_weight_pairs()
    n = settings.n_channels
    jobs = [(float(w1), float(w2), i, cfg, settings) for (w1, w2) in pairs for i in range(n)]
    results = _run_jobs(_region_job, jobs, settings.jobs)
    points = []
    pos = 0
    for w1, w2 in pairs:
        cell = np.array(results[pos : pos + n])
        pos += n
        er = cell.mean(axis=0)
        points.append(RegionPoint("RS", w1, w2, float(er[0]), float(er[1])))
        points.append(RegionPoint("NoRS", w1, w2, float(er[2]), float(er[3])))
    return points


def upper_right_hull(xy: Sequence) -> list:
    """Upper-right convex boundary of a 2-D point cloud.

    Returns vertices ordered by increasing first coordinate, from the
    highest-second-coordinate point to the largest-first-coordinate point.
    """
    pts = sorted({(float(x), float(y)) for x, y in xy})
    if len(pts) <= 1:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    upper = upper[::-1]                # left-to-right along the top
    top = max(range(len(upper)), key=lambda i: upper[i][1])
    return upper[top:]


def hull_contains(hull: Sequence, point, tol: float = 1e-9) -> bool:
    """Whether a point is dominated by the region under an upper-right hull."""
    if not hull:
        return False
    x, y = float(point[0]), float(point[1])
    xs = [p[0] for p in hull]
    ys = [p[1] for p in hull]
    if x <= xs[0]:
        return y <= ys[0] + tol
    if x > xs[-1] + tol:
        return False
    bound = float(np.interp(x, xs, ys))
    return y <= bound + tol


# ---------------------------------------------------------------------------
# CSV output (floats with 12 significant digits)

def _fmt(v) -> str:
    return _FLOAT_FMT % float(v)


def write_esr_csv(points: Sequence[EsrPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "snr_db", "esr", "stderr", "n"])
        for p in points:
            w.writerow([p.scheme, _fmt(p.snr_db), _fmt(p.esr), _fmt(p.stderr), p.n_channels])


def write_region_csv(points: Sequence[RegionPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "w1", "w2", "er1", "er2"])
        for p in points:
            w.writerow([p.scheme, _fmt(p.w1), _fmt(p.w2), _fmt(p.er1), _fmt(p.er2)])


def write_slopes_csv(rows: Sequence, path) -> None:
    """rows: iterable of (scheme, alpha, K, slope)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "alpha", "K", "slope"])
        for scheme, alpha, k, slope in rows:
            w.writerow([scheme, _fmt(alpha), k, _fmt(slope)])
