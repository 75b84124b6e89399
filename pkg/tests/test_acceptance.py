"""Acceptance suite: one PASS/FAIL line per criterion.

Runs under pytest (lines are printed even with output capture on) or as a
script: ``python tests/test_acceptance.py``.  Tolerances are fixed here and
never adjusted to the measured values.
"""
import functools
import math
import random
import sys
import time

import numpy as np
import pytest

from chowlab.correlator import (correlation_scan, katai_pair_stat, mrt_stat,
                                short_interval_stat)
from chowlab.functions import EvaluatedTable, Product, character_group, parse_spec, tabulate
from chowlab.patterns import (PatternQuery, expanded_residue_indicator,
                              expanded_sign_indicator, pattern_scan)
from chowlab.pretense import distance_sq, min_distance, strong_aperiodicity_scan
from chowlab.sieve import build_block

pytestmark = pytest.mark.slow

# ---------------------------------------------------------------- oracles


def trial_division(N):
    """omega, Omega, squarefree flag for 1..N by dividing out every p <= sqrt N."""
    rest = np.arange(1, N + 1, dtype=np.int64)
    omega = np.zeros(N, dtype=np.int64)
    big = np.zeros(N, dtype=np.int64)
    sqf = np.ones(N, dtype=bool)
    for p in range(2, math.isqrt(N) + 1):
        if any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
            continue
        hit = rest % p == 0
        omega += hit
        e = np.zeros(N, dtype=np.int64)
        while hit.any():
            idx = np.flatnonzero(hit)
            rest[idx] //= p
            e[idx] += 1
            hit[idx] = rest[idx] % p == 0
        big += e
        sqf &= e <= 1
    left = rest > 1
    return omega + left, big + left, sqf


# ---------------------------------------------------------------- criteria


def criterion_1():
    N = 10 ** 6
    start = time.perf_counter()
    block = build_block(1, N + 1)
    elapsed = time.perf_counter() - start
    omega, big, sqf = trial_division(N)
    lam = np.where(big % 2 == 0, 1, -1)
    mu = np.where(sqf, lam, 0)
    ok = (np.array_equal(block.omega, omega) and np.array_equal(block.big_omega, big)
          and np.array_equal(block.lam, lam) and np.array_equal(block.mu, mu)
          and elapsed <= 10)
    return ok, f"n <= 1e6 match oracle, sieve {elapsed:.2f}s (limit 10s)"


def criterion_2():
    N = 10 ** 5
    block = build_block(1, N + 1)
    worst = 0.0
    exact_ok = True
    for counter, src in (("omega", block.omega), ("Omega", block.big_omega)):
        for b in (2, 3, 4):
            e = src.astype(np.int64) % b
            for a in range(b):
                exact, z = expanded_residue_indicator(e, b, a)
                ind = e == a
                want = np.zeros_like(exact)
                want[:, 0] = b * ind
                exact_ok &= np.array_equal(exact, want)
                worst = max(worst, float(np.abs(z - ind).max()))
    lam = block.lam.astype(np.float64)
    for eps in (1, -1):
        exact_ok &= np.array_equal(expanded_sign_indicator(lam, eps), (lam == eps) * 1.0)
    ok = exact_ok and worst <= 1e-12
    return ok, f"exact in Z[zeta]: {exact_ok}, max complex error {worst:.1e} (limit 1e-12)"


def _random_spec(rng):
    kind = rng.randrange(6)
    if kind == 0:
        return parse_spec(rng.choice(["liouville", "mobius", "one"]))
    if kind == 1:
        return parse_spec(f"root_of_unity:{rng.randint(2, 7)}")
    if kind == 2:
        return parse_spec(f"complete_root_of_unity:{rng.randint(2, 7)}")
    if kind == 3:
        return parse_spec(f"archimedean:{rng.uniform(-20, 20)!r}")
    if kind == 4:
        q = rng.choice([3, 4, 5, 7, 8, 12])
        return parse_spec(f"character:{q}:{rng.randrange(1, len(character_group(q)))}")
    z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    z /= max(abs(z), 1.0)
    return parse_spec({"table": {"default": [[z.real, z.imag]]}})


def criterion_3():
    rng = random.Random(20240611)
    worst = -math.inf
    for N in (10 ** 3, 10 ** 4, 10 ** 5):
        def d(f, g):
            return math.sqrt(distance_sq(f, g, N))
        for _ in range(200):
            f, g, h = (_random_spec(rng) for _ in range(3))
            worst = max(worst, d(f, g) - d(f, h) - d(h, g))
            f1, f2, g1, g2 = (_random_spec(rng) for _ in range(4))
            worst = max(worst, d(Product((f1, f2)), Product((g1, g2))) - d(f1, g1) - d(f2, g2))
    v = distance_sq("liouville", "one", 20)
    ok = worst <= 1e-9 and abs(v - 2.9109556) <= 1e-6
    return ok, f"max inequality excess {worst:.2e} (slack 1e-9), D^2(lambda,1;20) = {v:.10f}"


def criterion_4():
    one = [min_distance("one", N).value for N in (10 ** 3, 10 ** 4, 10 ** 5)]
    arch = min_distance("archimedean:0.5", 10 ** 4)
    rou = [min_distance("root_of_unity:3", N).value for N in (10 ** 4, 10 ** 5, 10 ** 6)]
    cutoffs = [10 ** 3, 10 ** 4, 10 ** 5]
    v_lam = strong_aperiodicity_scan("liouville", 4, cutoffs).verdict
    v_chi = strong_aperiodicity_scan("character:4:1", 4, cutoffs).verdict
    ok = (all(x == 0 for x in one) and arch.value <= 1e-6 and abs(arch.t_star - 0.5) <= 1e-3
          and rou[0] < rou[1] < rou[2]
          and v_lam == "evidence-strong-aperiodic" and v_chi == "evidence-not")
    return ok, (f"M(one)=0: {all(x == 0 for x in one)}; M(n^0.5i)={arch.value:.1e} at "
                f"t*={arch.t_star:.6f}; M(f_3)={[round(x, 4) for x in rou]}; "
                f"verdicts liouville={v_lam}, chi4={v_chi}")


@functools.lru_cache(maxsize=None)
def chowla_scan(threads):
    return correlation_scan(["liouville"], "n,n^2", "1:200", (10 ** 5, 10 ** 6, 10 ** 7),
                            threads=threads)


def criterion_5():
    start = time.perf_counter()
    s = chowla_scan(1)
    elapsed = time.perf_counter() - start
    ok = s.summary[-1] <= 0.02 and s.summary[-1] < s.summary[0]
    return ok, (f"UD at M=1e5,1e6,1e7: {', '.join(f'{x:.3e}' for x in s.summary)} "
                f"(limit 0.02), {elapsed:.1f}s")


def criterion_6():
    s = correlation_scan(["liouville"], "frac:1.5,2.5", "1:200", (10 ** 7,))
    ok = s.summary[-1] <= 0.02
    return ok, f"mean |c| at M=1e7: {s.summary[-1]:.3e} (limit 0.02)"


def criterion_7():
    a = mrt_stat("liouville", 10 ** 7, 100)
    b = mrt_stat("character:3:1", 10 ** 6, 99)
    ok = a <= 0.02 and abs(b - 4 / 9) <= 0.01
    return ok, f"liouville {a:.3e} (limit 0.02); chi3 {b:.6f} (4/9 +- 0.01)"


def criterion_8():
    table = tabulate("liouville", 1, 10 ** 7 + 1001)
    v = [short_interval_stat(table, 10 ** 7, N) for N in (10, 100, 1000)]
    ok = v[0] > v[1] > v[2] and v[2] <= 0.1
    return ok, f"N=10,100,1000: {', '.join(f'{x:.4f}' for x in v)} (last <= 0.1)"


def _pattern_check(template, tol):
    scan = pattern_scan(template, "1:200", (10 ** 7,))
    good = agree = total = 0
    sums_ok = True
    npts = 0
    for (pt, M), res in scan.results.items():
        npts += 1
        good += all(abs(r.density - r.target) <= tol for r in res)
        agree = max(agree, max(abs(r.density - r.expansion_density) for r in res))
        total = sum(r.count for r in res)
        sums_ok &= total == M
    return good / 200, agree, sums_ok and npts == 200 and not scan.errors


def criterion_9():
    sign = PatternQuery("sign", "n,n^2", (1,), 10 ** 7, eps=(1, 1, 1))
    res = PatternQuery("residue", "n,n^2", (1,), 10 ** 7, moduli=(2, 3, 2),
                       residues=(0, 0, 0), counters=("omega",) * 3)
    fs, ds, ss = _pattern_check(sign, 0.05)
    fr, dr, sr = _pattern_check(res, 0.05)
    ok = fs >= 0.9 and fr >= 0.9 and max(ds, dr) <= 1e-9 and ss and sr
    return ok, (f"points within 0.05: sign {fs:.1%}, residue {fr:.1%} (need 90%); "
                f"max |direct - expansion| {max(ds, dr):.1e}; partitions sum to 1: {ss and sr}")


def criterion_10():
    runs = [chowla_scan(t) for t in (1, 4, 8)]
    same = all(np.array_equal(r.data, runs[0].data) and r.summary == runs[0].summary
               for r in runs[1:])
    return same, f"threads 1/4/8 bit-identical values: {same}"


def criterion_11():
    alpha = math.sqrt(2) - 1
    N = 10 ** 5
    n = np.arange(1, 3 * N + 1, dtype=np.float64)
    table = EvaluatedTable.from_values(np.exp(2j * math.pi * ((n * alpha) % 1.0)))
    v = abs(katai_pair_stat(table, 2, 3, N))
    bound = 1 / (N * 2 * math.sin(math.pi * alpha)) + 1e-9
    return v <= bound, f"|stat| = {v:.4e}, bound {bound:.4e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, len(CRITERIA) + 1))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(line(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
