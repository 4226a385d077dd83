"""Compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel runs once to warm up (numba compiles on the first call), then
the best of ``--repeat`` timings is reported for both paths together with
a check that the outputs agree.
"""

import argparse
import time

import numpy as np

from pel import kernels
from pel._accel import HAVE_NUMBA
from pel.library import ex4_mixed_iid
from pel.processes import simulate_codes


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def row(name, size, t_numba, t_numpy, agree):
    speedup = t_numpy / t_numba if t_numba > 0 else float("inf")
    print(f"{name:<16}{size:>16}{t_numba * 1e3:>12.2f}{t_numpy * 1e3:>12.2f}{speedup:>10.1f}x  {agree}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    spec = ex4_mixed_iid()
    probs = np.array([float(p) for p in spec.dist.probs])
    c = float(spec.dist.continuous_mass)
    m_pat = 20_000 if args.quick else 100_000
    m_step = 200 if args.quick else 2_000

    print(f"{'kernel':<16}{'size':>16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>11}  agree")
    for n in (16, 64):
        codes = simulate_codes(spec, n, m_pat, seed=1).codes
        t1, a = best_of(lambda: kernels.patterns_numba(codes), args.repeat)
        t2, b = best_of(lambda: kernels.patterns_numpy(codes), args.repeat)
        row("patterns", f"{m_pat}x{n}", t1, t2, np.array_equal(a, b))

    for n in (9, 11) if args.quick else (10, 12):
        t1, a = best_of(lambda: kernels.rgs_numba(n), args.repeat)
        t2, b = best_of(lambda: kernels.rgs_numpy(n), args.repeat)
        row("rgs", f"Bell({n})={a.shape[0]}", t1, t2, np.array_equal(a, b))

    pats = kernels.patterns_numba(simulate_codes(spec, 64, m_step, seed=2).codes)
    t1, a = best_of(lambda: kernels.iid_step_probs_numba(pats, probs, c), args.repeat)
    t2, b = best_of(lambda: kernels.iid_step_probs_numpy(pats, probs, c), max(1, args.repeat // 2))
    row("iid_step_probs", f"{m_step}x64", t1, t2, bool(np.allclose(a, b, rtol=1e-12, atol=0)))


if __name__ == "__main__":
    main()
