"""Compare the compiled scaling-loop kernel against the pure-Python fallback.

Runs the same doubly-stochastic projection workload through both backends and
prints per-size timings plus the speedup.  Usage:

    python3 benchmarks/bench_kernels.py [--sizes 64,128,256] [--iters 200] [--repeat 5]
"""

import argparse
import time

import numpy as np

from matchdiff import _kernels_py

try:
    from matchdiff import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def run_backend(scaling_loop, log_k, iters):
    n, m = log_k.shape
    log_p = np.zeros(n)
    log_q = np.zeros(m)
    log_u = np.zeros(n)
    log_v = np.zeros(m)
    scaling_loop(log_k, log_p, log_q, log_u, log_v, iters, 0.0, iters + 1)
    return log_u, log_v


def time_backend(scaling_loop, log_k, iters, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        run_backend(scaling_loop, log_k.copy(), iters)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,128,256")
    parser.add_argument("--iters", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    rng = np.random.default_rng(0)
    print(f"{'size':>6} {'python (s)':>12} {'compiled (s)':>12} {'speedup':>8}")
    for n in sizes:
        log_k = rng.standard_normal((n, n))
        t_py = time_backend(_kernels_py.scaling_loop, log_k, args.iters, args.repeat)
        if _kernels_c is None:
            print(f"{n:>6} {t_py:>12.4f} {'n/a':>12} {'n/a':>8}")
            continue
        t_c = time_backend(_kernels_c.scaling_loop, log_k, args.iters, args.repeat)
        u_py, v_py = run_backend(_kernels_py.scaling_loop, log_k.copy(), args.iters)
        u_c, v_c = run_backend(_kernels_c.scaling_loop, log_k.copy(), args.iters)
        agree = max(np.abs(u_py - u_c).max(), np.abs(v_py - v_c).max())
        print(f"{n:>6} {t_py:>12.4f} {t_c:>12.4f} {t_py / t_c:>8.2f}  (max potential diff {agree:.2e})")


if __name__ == "__main__":
    main()
