"""Correlation averages, short-interval statistics and the Katai pair average."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chowlab._backend import kernels
from chowlab.functions import Conjugate, EvaluatedTable, _lcm, parse_spec, tabulate
from chowlab.numerics import fsum_complex, phase_sum
from chowlab.shifts import LatticeBox, ShiftFamily, parse_family
from chowlab.sieve import build_block

BLOCK = 4096


class CoverageError(ValueError):
    """A table does not reach every argument a statistic needs."""


class DependentFamilyError(ValueError):
    pass


# --------------------------------------------------------------------------
# tables

def build_tables(specs, lo, hi):
    """Tabulate each spec on [lo, hi), sharing one sieve and one table per distinct spec."""
    specs = [parse_spec(s) for s in specs]
    block = build_block(1, max(hi, 1 - lo + 1, 2))
    cache = {}
    out = []
    for s in specs:
        key = s.dumps()
        if key not in cache:
            cache[key] = tabulate(s, lo, hi, block)
        out.append(cache[key])
    return out


def conjugate_table(table):
    spec = None if table.spec is None else Conjugate(table.spec)
    if table.exact:
        exps = (-table.exponents.astype(np.int64)) % table.order
        return EvaluatedTable(spec=spec, lo=table.lo, hi=table.hi, order=table.order,
                              exponents=exps.astype(np.uint16), zero_mask=table.zero_mask)
    return EvaluatedTable(spec=spec, lo=table.lo, hi=table.hi, raw=np.conj(table.values))


def _require(table, lo, hi, label):
    if not table.covers(lo, hi):
        raise CoverageError(f"{label} covers [{table.lo}, {table.hi}) "
                            f"but [{lo}, {hi}) is needed")


# --------------------------------------------------------------------------
# multi-shift correlation

class _Accumulator:
    """Running sum of prod_j f_j(m + s_j) over consecutive m-segments.

    Exact tables accumulate an integer phase histogram, so the order of the
    segments never matters; otherwise per-block compensated partials are
    kept and reduced with fsum.
    """

    def __init__(self, tables, offsets, threads=1):
        self.tables = tables
        self.offsets = [0] + [int(s) for s in offsets]
        self.threads = threads
        self.done = 0
        self.exact = all(t.exact for t in tables)
        if self.exact:
            self.L = _lcm(*(t.order for t in tables))
            m = np.array([[self.L // t.order for t in tables]], dtype=np.int64)
            self.mults = m
            self.active = np.ones_like(m, dtype=np.uint8)
            self.width = int(sum(int(m[0, j]) * (t.order - 1) for j, t in enumerate(tables))) + 1
            self.hist = np.zeros(self.width, dtype=np.int64)
            self.exps = [t.exponents for t in tables]
            self.masks = [t.mask_u8 for t in tables]
        else:
            self.vals = [np.ascontiguousarray(t.values) for t in tables]
            self.partials = []

    def _starts(self, m0):
        return np.array([m0 + s - t.lo for s, t in zip(self.offsets, self.tables)],
                        dtype=np.int64)

    def extend(self, M):
        """Add the terms m in (done, M]."""
        if M <= self.done:
            return
        for j, (s, t) in enumerate(zip(self.offsets, self.tables)):
            _require(t, self.done + 1 + s, M + s + 1, f"table for f{j}")
        starts = self._starts(self.done + 1)
        count = M - self.done
        if self.exact:
            self.hist += kernels.exact_corr_hist(self.exps, self.masks, starts, self.mults,
                                                 self.active, self.width, count,
                                                 self.threads)[0]
        else:
            self.partials.append(kernels.complex_corr_blocks(self.vals, starts, count,
                                                             BLOCK, self.threads))
        self.done = M

    def total(self):
        if self.exact:
            return phase_sum(self.hist, self.L)
        if not self.partials:
            return 0j
        return fsum_complex(np.concatenate(self.partials))


def correlation(tables, shifts, M, threads=1):
    """(1/M) sum_{m<=M} f_0(m) prod_j f_j(m + s_j)."""
    tables = list(tables)
    shifts = [int(s) for s in shifts]
    if len(shifts) != len(tables) - 1:
        raise ValueError(f"{len(tables)} tables need {len(tables) - 1} shifts, got {len(shifts)}")
    M = int(M)
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    acc = _Accumulator(tables, shifts, threads)
    acc.extend(M)
    return acc.total() / M


@dataclass(frozen=True)
class EvaluationWindow:
    M_grid: tuple

    def __post_init__(self):
        g = tuple(int(m) for m in self.M_grid)
        if not g or g[0] < 1 or any(a >= b for a, b in zip(g, g[1:])):
            raise ValueError(f"M_grid must be strictly increasing positive integers, got {g}")
        object.__setattr__(self, "M_grid", g)


@dataclass
class CorrelationSeries:
    functions: list
    family: ShiftFamily
    box: LatticeBox
    M_grid: tuple
    points: list
    shifts: list
    data: np.ndarray            # complex, shape (len(M_grid), len(points))
    summary: list = field(default_factory=list)

    @property
    def differences(self):
        """Successive changes of the summary along the M grid."""
        return [b - a for a, b in zip(self.summary, self.summary[1:])]

    def rows(self):
        for k, M in enumerate(self.M_grid):
            for i, pt in enumerate(self.points):
                yield pt, M, self.data[k, i]


def _expand_functions(functions, size):
    functions = [parse_spec(f) for f in functions]
    if len(functions) == 1:
        return functions * (size + 1)
    if len(functions) != size + 1:
        raise ValueError(f"family of {size} shifts needs 1 or {size + 1} functions, "
                         f"got {len(functions)}")
    return functions


def ud_statistic(values, c=0):
    """Mean of |a(n) - c| over the box."""
    a = np.asarray(values, dtype=np.complex128)
    if a.size == 0:
        raise ValueError("empty box")
    return math.fsum(np.abs(a - c)) / a.size


def correlation_scan(functions, family, box, window, threads=1, allow_dependent=False,
                     tables=None):
    """c(M; n) for every n in the box and M in the window, plus E_n |c(M; n)|."""
    family = parse_family(family)
    if isinstance(box, str):
        box = LatticeBox.parse(box)
    if not isinstance(window, EvaluationWindow):
        window = EvaluationWindow(tuple(window))
    if box.arity != family.arity:
        raise ValueError(f"box has arity {box.arity}, family has arity {family.arity}")
    if family.kind == "polynomial" and family.independence != "certified" and not allow_dependent:
        raise DependentFamilyError(
            "{1, " + ", ".join(str(p) for p in family.polys) + "} is linearly dependent "
            "over Q; pass allow_dependent to explore it anyway")
    specs = _expand_functions(functions, family.size)
    points = list(box.points())
    shifts = [family.shifts(pt) for pt in points]
    smin = min(min(s) for s in shifts)
    smax = max(max(s) for s in shifts)
    Mmax = window.M_grid[-1]
    if tables is None:
        tables = build_tables(specs, min(1, 1 + smin), Mmax + max(smax, 0) + 1)
    data = np.zeros((len(window.M_grid), len(points)), dtype=np.complex128)
    for i, s in enumerate(shifts):
        acc = _Accumulator(tables, s, threads)
        for k, M in enumerate(window.M_grid):
            acc.extend(M)
            data[k, i] = acc.total() / M
    summary = [ud_statistic(row) for row in data]
    return CorrelationSeries(functions=specs, family=family, box=box, M_grid=window.M_grid,
                             points=points, shifts=shifts, data=data, summary=summary)


# --------------------------------------------------------------------------
# short intervals

def _table_for(f, hi):
    if isinstance(f, EvaluatedTable):
        _require(f, 1, hi, "table")
        return f
    return tabulate(f, 1, hi)


def _window_stat(f, M, N, t, threads):
    M, N = int(M), int(N)
    if M < 1 or N < 1:
        raise ValueError(f"M and N must be >= 1, got {M}, {N}")
    table = _table_for(f, M + N + 1)
    vals = np.ascontiguousarray(table.values)
    parts = kernels.window_abs_blocks(vals, 1 - table.lo, M, N, float(t), BLOCK, threads)
    return math.fsum(parts) / (M * N)


def short_interval_stat(f, M, N, threads=1):
    """(1/M) sum_{m<=M} |(1/N) sum_{n<=N} f(m+n)|."""
    return _window_stat(f, M, N, 0.0, threads)


def twisted_short_interval_stat(f, M, N, t, threads=1):
    """(1/M) sum_{m<=M} |(1/N) sum_{n<=N} f(m+n) e(nt)|."""
    return _window_stat(f, M, N, t, threads)


def mrt_stat(f, M, N, threads=1):
    """(1/N) sum_{n<=N} |(1/M) sum_{m<=M} f(m+n) conj f(m)|."""
    M, N = int(M), int(N)
    if M < 1 or N < 1:
        raise ValueError(f"M and N must be >= 1, got {M}, {N}")
    table = _table_for(f, M + N + 1)
    conj = conjugate_table(table)
    vals = [abs(correlation([conj, table], [n], M, threads)) for n in range(1, N + 1)]
    return math.fsum(vals) / N


@dataclass(frozen=True)
class FourierSup:
    value: float
    gap: float          # true statistic lies in [value, value + gap]
    grid_size: int


def local_fourier_sup(f, M, N, oversample=8, threads=1):
    """(1/M) sum_m max_t |(1/N) sum_{n<=N} f(m+n) e(nt)| over t = k/(oversample N).

    Between grid points the normalized sum moves by at most pi/oversample,
    which is reported as ``gap``.
    """
    M, N, oversample = int(M), int(N), int(oversample)
    if oversample < 2:
        raise ValueError(f"oversample must be >= 2, got {oversample}")
    if M < 1 or N < 1:
        raise ValueError(f"M and N must be >= 1, got {M}, {N}")
    table = _table_for(f, M + N + 1)
    vals = np.ascontiguousarray(table.values)
    K = oversample * N
    parts = kernels.fourier_max_blocks(vals, 1 - table.lo, M, N, K, BLOCK, threads)
    return FourierSup(value=math.fsum(parts) / (M * N), gap=math.pi / oversample, grid_size=K)


# --------------------------------------------------------------------------
# Katai

def katai_pair_stat(table, p, q, N):
    """(1/N) sum_{n<=N} a(pn) conj a(qn)."""
    p, q, N = int(p), int(q), int(N)
    if p == q:
        raise ValueError("p and q must be distinct")
    for x in (p, q):
        if x < 2 or any(x % d == 0 for d in range(2, math.isqrt(x) + 1)):
            raise ValueError(f"{x} is not prime")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    _require(table, p, max(p, q) * N + 1, "table")
    n = np.arange(1, N + 1, dtype=np.int64)
    ip, iq = p * n - table.lo, q * n - table.lo
    if table.exact:
        e = (table.exponents[ip].astype(np.int64) - table.exponents[iq]) % table.order
        if table.zero_mask is not None:
            e = e[~(table.zero_mask[ip] | table.zero_mask[iq])]
        return phase_sum(np.bincount(e, minlength=table.order), table.order) / N
    v = table.values
    return fsum_complex(v[ip] * np.conj(v[iq])) / N
