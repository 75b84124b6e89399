"""Compiled kernels against the numpy fallback on identical inputs.

    python benchmarks/bench_kernels.py [--size 2000000] [--repeat 3]

Prints one row per kernel: best wall time of each backend, the speedup, and
whether the outputs agree (exactly for integer kernels, to 1e-9 otherwise).
"""
import argparse
import time

import numpy as np

from chowlab import _pure
from chowlab._backend import compiled
from chowlab.sieve import primes_up_to


def best(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "iub":
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=0, atol=1e-9)


def cases(n):
    rng = np.random.default_rng(7)
    primes = primes_up_to(int(np.sqrt(2 * n)) + 1)
    lam = rng.integers(0, 2, n + 64).astype(np.uint16)
    starts = np.array([0, 5, 40], dtype=np.int64)
    mults = np.array([[1, 1, 1]], dtype=np.int64)
    active = np.ones((1, 3), dtype=np.uint8)
    z = np.exp(2j * np.pi * rng.random(n + 2048))
    digits = [rng.integers(0, r, n + 64).astype(np.uint8) for r in (2, 3, 2)]
    radices = np.array([2, 3, 2], dtype=np.int64)
    return {
        "sieve_segment": lambda k: k.sieve_segment(n, 2 * n, primes),
        "exact_corr_hist": lambda k: k.exact_corr_hist([lam] * 3, [None] * 3, starts, mults,
                                                       active, 3, n),
        "complex_corr_blocks": lambda k: k.complex_corr_blocks([z, z], starts[:2], n, 4096),
        "joint_hist": lambda k: k.joint_hist(digits, starts, radices, n),
        "window_abs_blocks": lambda k: k.window_abs_blocks(z, 0, n, 100, 0.0, 4096),
        "fourier_max_blocks": lambda k: k.fourier_max_blocks(z, 0, n // 100, 64, 512, 4096),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    core = compiled()
    if core is None:
        raise SystemExit("compiled extension not built; run pip install -e . first")
    print(f"{'kernel':<22}{'compiled s':>12}{'pure s':>12}{'speedup':>10}  agree")
    for name, call in cases(args.size).items():
        tc, oc = best(lambda: call(core), args.repeat)
        tp, op = best(lambda: call(_pure), args.repeat)
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}  {same(oc, op)}")


if __name__ == "__main__":
    main()
