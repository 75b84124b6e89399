"""Pretentious distance, M(f; N), and aperiodicity evidence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from chowlab.functions import (Archimedean, DirichletCharacter, Product, character_group,
                               parse_spec, tabulate)
from chowlab.numerics import phase_sum
from chowlab.sieve import primes_up_to

GOLDEN = (math.sqrt(5) - 1) / 2


@lru_cache(maxsize=8)
def _primes(N):
    p = primes_up_to(N)
    p.setflags(write=False)
    return p


@lru_cache(maxsize=8)
def _logs(N):
    out = np.log(_primes(N).astype(np.float64))
    out.setflags(write=False)
    return out


def _prime_values(f, N):
    return parse_spec(f).prime_values(_primes(N))


def distance_sq(f, g, N):
    """D(f, g; N)^2 = sum_{p <= N} (1 - Re f(p) conj g(p)) / p."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    p = _primes(int(N))
    terms = (1.0 - (_prime_values(f, N) * np.conj(_prime_values(g, N))).real) / p
    # each summand is >= 0; rounding can leave -1e-17
    return math.fsum(np.maximum(terms, 0.0))


def _archimedean_terms(fp, logs, p, t):
    return np.maximum((1.0 - (fp * np.exp(-1j * t * logs)).real) / p, 0.0)


def distance_to_archimedean(f, t, N):
    """D(f, n^{it}; N)^2."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    N = int(N)
    return math.fsum(_archimedean_terms(_prime_values(f, N), _logs(N), _primes(N), t))


@dataclass
class DistanceProfile:
    """D^2(f, g; N) along ascending cutoffs; non-decreasing by construction."""

    f: object
    twist: object
    cutoffs: list
    values: list


def distance_profile(f, g, cutoffs):
    """``g`` is a spec, or a real number t standing for n^{it}."""
    f = parse_spec(f)
    cutoffs = [int(N) for N in cutoffs]
    if any(a >= b for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be strictly ascending")
    if isinstance(g, (int, float)):
        g = Archimedean(float(g))
    g = parse_spec(g)
    return DistanceProfile(f=f, twist=g, cutoffs=cutoffs,
                           values=[distance_sq(f, g, N) for N in cutoffs])


@dataclass(frozen=True)
class SearchConfig:
    """t-grid for M(f; N): uniform on |t| <= 1, geometric on 1 <= |t| <= N."""

    step_scale: float = 0.25       # uniform step = step_scale / (log N)^2
    log_step: float = 0.05         # ratio between consecutive large-|t| nodes is e^log_step
    refine_width: float = 1e-6
    refine: bool = True
    candidates: int = 8            # local grid minima that get refined
    t_max: float | None = None     # defaults to N

    def grid(self, N):
        L = math.log(N)
        step = self.step_scale / L ** 2
        k = int(math.floor(1.0 / step))
        small = np.arange(-k, k + 1) * step
        top = N if self.t_max is None else min(self.t_max, N)
        if top <= 1:
            return small[np.abs(small) <= top]
        nlog = int(math.floor(math.log(top) / self.log_step))
        big = np.exp(np.arange(0, nlog + 1) * self.log_step)
        big = big[(big > small[-1]) & (big <= top)]
        return np.unique(np.concatenate([-big[::-1], small, big, [0.0]]))


@dataclass(frozen=True)
class MinDistance:
    t_star: float
    value: float
    grid_value: float


def _grid_values(fp, logs, p, ts, chunk=64):
    inv = 1.0 / p
    base = math.fsum(inv)
    a, b = fp.real * inv, fp.imag * inv
    out = np.empty(len(ts))
    for i in range(0, len(ts), chunk):
        ang = np.outer(ts[i:i + chunk], logs)
        # Re(f(p) e^{-it log p}) = Re f cos + Im f sin
        out[i:i + chunk] = base - (np.cos(ang) @ a + np.sin(ang) @ b)
    return out


def _golden(fn, a, b, width):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def min_distance(f, N, search=None):
    """(t*, M(f; N)): grid minimum of D(f, n^{it}; N)^2, then golden-section refinement."""
    search = search or SearchConfig()
    N = int(N)
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    p, logs = _primes(N), _logs(N)
    fp = _prime_values(f, N)

    def exact(t):
        return math.fsum(_archimedean_terms(fp, logs, p, t))

    ts = search.grid(N)
    approx = _grid_values(fp, logs, p, ts)
    # local minima of the grid, best first
    left = np.r_[np.inf, approx[:-1]]
    right = np.r_[approx[1:], np.inf]
    cand = np.flatnonzero((approx <= left) & (approx <= right))
    cand = cand[np.argsort(approx[cand], kind="stable")][:search.candidates]
    best_t, best = 0.0, math.inf
    for j in cand:
        v = exact(float(ts[j]))
        if v < best:
            best_t, best = float(ts[j]), v
    grid_best = best
    if search.refine:
        for j in cand:
            t, v = _golden(exact, float(ts[max(j - 1, 0)]), float(ts[min(j + 1, len(ts) - 1)]),
                           search.refine_width)
            if v < best:
                best_t, best = t, v
    return MinDistance(t_star=best_t, value=best, grid_value=grid_best)


@dataclass
class CharacterCurve:
    q: int
    index: int
    character: DirichletCharacter
    cutoffs: list
    values: list
    t_stars: list


@dataclass
class AperiodicityReport:
    f: object
    curves: list = field(default_factory=list)
    verdict: str = "inconclusive"
    increase_threshold: float = 0.2
    level_threshold: float = 0.05

    def rows(self):
        for c in self.curves:
            for N, t, v in zip(c.cutoffs, c.t_stars, c.values):
                yield c.q, c.index, N, t, v


def strong_aperiodicity_scan(f, q_max, cutoffs, search=None, increase_threshold=0.2,
                             level_threshold=0.05):
    """M(f chi; N) curves for every character chi of modulus q <= q_max.

    Verdict: ``evidence-strong-aperiodic`` when every curve grows by at least
    ``increase_threshold`` between the top two cutoffs; ``evidence-not`` when
    some curve fails to increase there or stays below ``level_threshold`` at
    both; otherwise ``inconclusive``.
    """
    f = parse_spec(f)
    cutoffs = [int(N) for N in cutoffs]
    if len(cutoffs) < 2 or any(a >= b for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be strictly ascending, at least two")
    report = AperiodicityReport(f=f, increase_threshold=increase_threshold,
                                level_threshold=level_threshold)
    for q in range(1, int(q_max) + 1):
        for idx, chi in enumerate(character_group(q)):
            twisted = f if chi.is_principal and q == 1 else Product((f, chi))
            vals, ts = [], []
            for N in cutoffs:
                r = min_distance(twisted, N, search)
                vals.append(r.value)
                ts.append(r.t_star)
            report.curves.append(CharacterCurve(q, idx, chi, cutoffs, vals, ts))
    growth = [c.values[-1] - c.values[-2] for c in report.curves]
    flat = any(g <= 0 for g in growth)
    low = any(max(c.values[-2:]) < level_threshold for c in report.curves)
    if flat or low:
        report.verdict = "evidence-not"
    elif all(g >= increase_threshold for g in growth):
        report.verdict = "evidence-strong-aperiodic"
    else:
        report.verdict = "inconclusive"
    return report


def aperiodicity_mean(f, a, b, N, table=None):
    """E_{n <= N} f(a n + b)."""
    a, b, N = int(a), int(b), int(N)
    if a < 1 or b < 0 or N < 1:
        raise ValueError(f"need a >= 1, b >= 0, N >= 1; got {a}, {b}, {N}")
    hi = a * N + b + 1
    if table is None or not table.covers(a + b, hi):
        table = tabulate(f, 1, hi)
    idx = a * np.arange(1, N + 1, dtype=np.int64) + b - table.lo
    if table.exact:
        e = table.exponents[idx].astype(np.int64)
        if table.zero_mask is not None:
            e = e[~table.zero_mask[idx]]
        return phase_sum(np.bincount(e, minlength=table.order), table.order) / N
    z = table.values[idx]
    return complex(math.fsum(z.real), math.fsum(z.imag)) / N
