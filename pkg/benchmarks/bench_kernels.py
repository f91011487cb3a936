"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times the fused equalizer/weight + sample-average accumulation and the
validation-rate kernel on representative problem sizes, and reports the
per-call times plus the compiled/numpy speedup. The same data goes
through both backends, so the run doubles as an agreement check.
"""

import argparse
import time

import numpy as np

from ratesplit import SystemConfig, generate_scenario, sample_conditional
from ratesplit import _kernels_np

try:
    from ratesplit import _kernels_cy
except ImportError:
    _kernels_cy = None

SIZES = [
    # (K, Nt, M) — AO inner loop at desk scale up to validation-sized samples
    (2, 2, 100),
    (2, 2, 1000),
    (4, 4, 1000),
    (8, 8, 1000),
    (2, 2, 10000),
    (4, 4, 10000),
]


def _instance(K, Nt, M, seed):
    cfg = SystemConfig(K=K, Nt=Nt, Pt=100.0, M=M, seed=seed)
    rng = np.random.default_rng(seed)
    est, _ = generate_scenario(cfg, rng)
    sample = sample_conditional(est, M, rng)
    Pc = (rng.standard_normal(Nt) + 1j * rng.standard_normal(Nt)) * 2
    Pp = rng.standard_normal((Nt, K)) + 1j * rng.standard_normal((Nt, K))
    return sample.per_user, Pc, Pp, 1.0


def _time(fn, args, repeat):
    fn(*args)  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args()

    if _kernels_cy is None:
        print("compiled kernels not built; timing the numpy backend only")

    header = f"{'kernel':<14} {'K':>2} {'Nt':>3} {'M':>6} {'numpy':>10} {'cython':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for kernel in ("saf_accumulate", "sampled_rates"):
        for K, Nt, M in SIZES:
            args = _instance(K, Nt, M, seed=K * 1000 + M)
            t_np = _time(getattr(_kernels_np, kernel), args, opts.repeat)
            if _kernels_cy is not None:
                t_cy = _time(getattr(_kernels_cy, kernel), args, opts.repeat)
                out_np = getattr(_kernels_np, kernel)(*args)
                out_cy = getattr(_kernels_cy, kernel)(*args)
                for a, b in zip(out_np, out_cy):
                    np.testing.assert_allclose(a, b, rtol=5e-10, atol=1e-12)
                print(f"{kernel:<14} {K:>2} {Nt:>3} {M:>6} {t_np*1e3:>9.3f}m {t_cy*1e3:>9.3f}m "
                      f"{t_np/t_cy:>7.1f}x")
            else:
                print(f"{kernel:<14} {K:>2} {Nt:>3} {M:>6} {t_np*1e3:>9.3f}m {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
