"""Fast invariant suites behind the CLI selftest command.

Each suite prints one PASS/FAIL line; the runner returns the number of
failures. These are smoke-level guards (seconds), not the full pytest
acceptance battery.
"""

import numpy as np

from .baselines import InitScheme, init_precoder
from .channel import generate_scenario, sample_conditional
from .config import SystemConfig
from .optimizer import ao_solve
from .qcqp import check_kkt, objective_value, problem_from_safs, solve_precoder_update
from .ratewmmse import Precoder, PrecoderMode, rate_wmmse_identity_check
from .saa import compute_safs


def _random_instance(rng, K=2, Nt=3, Pt=50.0):
    h = (rng.standard_normal(Nt) + 1j * rng.standard_normal(Nt)) / np.sqrt(2)
    pc = (rng.standard_normal(Nt) + 1j * rng.standard_normal(Nt)) * 0.7
    Pp = (rng.standard_normal((Nt, K)) + 1j * rng.standard_normal((Nt, K))) * 0.9
    P = Precoder(pc, Pp, PrecoderMode.RS)
    scale = np.sqrt(Pt / P.total_power) * rng.uniform(0.2, 1.0)
    return h, Precoder(pc * scale, Pp * scale, PrecoderMode.RS)


def check_identity(n: int = 200, seed: int = 0) -> str:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        h, P = _random_instance(rng)
        xi_c, xi = rate_wmmse_identity_check(h, P, sigma_n2=1.0, user=0)
        worst = max(worst, 0.0)  # the check raises on violation
    return f"rate-wmmse identity on {n} random instances (raises on >1e-9)"


def check_ao(seed: int = 4) -> str:
    cfg = SystemConfig(K=2, Nt=2, Pt=10 ** 1.5, M=32, seed=seed, max_iters=400)
    est, _ = generate_scenario(cfg, np.random.default_rng(cfg.seed))
    sample = sample_conditional(est, cfg.M, np.random.default_rng(cfg.seed + 1))
    rs = ao_solve(est, cfg, init_precoder(est, cfg, InitScheme.MRC_SVD, PrecoderMode.RS),
                  PrecoderMode.RS, sample=sample)
    nors = ao_solve(est, cfg, init_precoder(est, cfg, InitScheme.MRC_SVD, PrecoderMode.NoRS),
                    PrecoderMode.NoRS, sample=sample)
    obj = rs.trace.objectives
    if np.any(np.diff(obj) > 1e-8):
        raise AssertionError("objective increased along the AO trace")
    if rs.asr < nors.asr - cfg.eps_R:
        raise AssertionError(f"dominance violated: RS {rs.asr:.6f} < NoRS {nors.asr:.6f}")
    if abs(obj[-1] - (cfg.K + 1 - rs.asr)) > 1e-7:
        raise AssertionError("objective/rate bookkeeping mismatch")
    return f"AO monotone + dominance (RS {rs.asr:.4f} >= NoRS {nors.asr:.4f})"


def check_qcqp(seed: int = 11) -> str:
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(K=2, Nt=3, Pt=100.0, M=16, seed=seed)
    est, _ = generate_scenario(cfg, rng)
    sample = sample_conditional(est, cfg.M, rng)
    worst = 0.0
    for _ in range(5):
        _, P = _random_instance(rng, K=cfg.K, Nt=cfg.Nt, Pt=cfg.Pt)
        saf = compute_safs(sample, P, cfg.sigma_n2)
        prob = problem_from_safs(saf, cfg.Pt, cfg.sigma_n2)
        sol = solve_precoder_update(prob)
        worst = max(worst, check_kkt(prob, sol).max_residual)
        # convexity spot check
        P2 = sol.P
        mid = Precoder(0.5 * (P.P_common + P2.P_common),
                       0.5 * (P.P_private + P2.P_private), PrecoderMode.RS)
        lhs = objective_value(prob, mid)
        rhs = 0.5 * objective_value(prob, P) + 0.5 * objective_value(prob, P2)
        if lhs > rhs + 1e-9:
            raise AssertionError("convexity violated on a midpoint")
    if worst > 1e-7:
        raise AssertionError(f"KKT residual {worst:.2e} above 1e-7")
    return f"QCQP KKT residuals <= {worst:.2e} on 5 instances"


def check_determinism(seed: int = 21) -> str:
    cfg = SystemConfig(K=2, Nt=2, Pt=100.0, M=16, seed=seed)
    outs = []
    for _ in range(2):
        est, _ = generate_scenario(cfg, np.random.default_rng(cfg.seed))
        sample = sample_conditional(est, cfg.M, np.random.default_rng(cfg.seed + 1))
        res = ao_solve(est, cfg, init_precoder(est, cfg), PrecoderMode.RS, sample=sample)
        outs.append((res.asr, res.P_opt.P_private.tobytes()))
    if outs[0] != outs[1]:
        raise AssertionError("identical runs produced different results")
    return "bit-identical rerun"


SUITES = (
    ("rate-wmmse-identity", check_identity),
    ("ao-monotone-dominance", check_ao),
    ("qcqp-kkt", check_qcqp),
    ("determinism", check_determinism),
)


def run_selftest() -> int:
    failures = 0
    for name, fn in SUITES:
        try:
            detail = fn()
            print(f"PASS {name}: {detail}")
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc}")
    return failures
