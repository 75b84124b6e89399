"""Sign-pattern and omega/Omega residue-pattern densities.

Every density is computed twice: by counting joint digit patterns directly,
and through the multiplicative expansion of the indicator into correlation
terms.  Both come out of integer histograms, so they agree up to the final
rounding of the phase sum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from chowlab._backend import kernels
from chowlab.correlator import EvaluationWindow, build_tables
from chowlab.functions import _lcm, parse_spec, unit_roots
from chowlab.numerics import phase_sum
from chowlab.shifts import LatticeBox, parse_family
from chowlab.sieve import build_block

COUNTERS = ("omega", "Omega")


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class PatternQuery:
    """One pattern at one shift vector.

    Sign mode: ``eps`` in {-1, +1}^(l+1) and ``functions`` (one spec, or one
    per slot).  Residue mode: ``moduli``, ``residues`` and per-slot
    ``counters`` ("omega" or "Omega"; a single entry applies to all slots).
    """

    mode: str
    family: object
    point: tuple
    M: int
    eps: tuple = ()
    functions: tuple = ("liouville",)
    moduli: tuple = ()
    residues: tuple = ()
    counters: tuple = ("omega",)

    def __post_init__(self):
        family = None if self.family in (None, "") else parse_family(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "point", tuple(int(x) for x in self.point))
        object.__setattr__(self, "M", int(self.M))
        k = self.slots
        if self.M < 1:
            raise PatternError(f"M must be >= 1, got {self.M}")
        if self.mode == "sign":
            eps = tuple(int(e) for e in self.eps)
            if len(eps) != k or any(e not in (1, -1) for e in eps):
                raise PatternError(f"eps must be {k} entries from {{-1, +1}}, got {self.eps}")
            object.__setattr__(self, "eps", eps)
            fs = tuple(parse_spec(f) for f in self.functions)
            if len(fs) == 1:
                fs = fs * k
            if len(fs) != k:
                raise PatternError(f"need 1 or {k} functions, got {len(fs)}")
            object.__setattr__(self, "functions", fs)
        elif self.mode == "residue":
            b = tuple(int(x) for x in self.moduli)
            a = tuple(int(x) for x in self.residues)
            if len(b) != k or len(a) != k:
                raise PatternError(f"need {k} moduli and residues, got {len(b)} and {len(a)}")
            for bj, aj in zip(b, a):
                if not 1 <= bj <= 255:
                    raise PatternError(f"modulus {bj} outside 1..255")
                if not 0 <= aj < bj:
                    raise PatternError(f"residue {aj} not in {{0, ..., {bj - 1}}}")
            c = tuple(self.counters)
            if len(c) == 1:
                c = c * k
            if len(c) != k or any(x not in COUNTERS for x in c):
                raise PatternError(f"counters must be {k} entries from {COUNTERS}, got {c}")
            object.__setattr__(self, "moduli", b)
            object.__setattr__(self, "residues", a)
            object.__setattr__(self, "counters", c)
        else:
            raise PatternError(f"unknown mode {self.mode!r}")

    @property
    def slots(self):
        return 1 if self.family is None else self.family.size + 1

    @property
    def target(self):
        if self.mode == "sign":
            return 2.0 ** -self.slots
        return 1.0 / math.prod(self.moduli)

    @property
    def label(self):
        return pattern_label(self.mode, self.eps if self.mode == "sign" else self.residues)

    def shifts(self):
        if self.family is None:
            return (0,)
        return (0,) + tuple(self.family.shifts(self.point))


def pattern_label(mode, pattern):
    if mode == "sign":
        return "".join("+" if e > 0 else "-" for e in pattern)
    return ":".join(str(a) for a in pattern)


def all_patterns(query):
    """Every sign vector / residue vector for the query's slots, in code order."""
    if query.mode == "sign":
        radices = (2,) * query.slots
        decode = lambda d: tuple(1 - 2 * x for x in d)  # noqa: E731
    else:
        radices = query.moduli
        decode = tuple
    # slot 0 varies fastest, matching the joint histogram code
    for digits in itertools.product(*(range(r) for r in reversed(radices))):
        yield decode(digits[::-1])


@dataclass
class PatternDensityResult:
    query: PatternQuery
    density: float
    expansion_density: float
    target: float
    count: int
    expansion_imag: float = 0.0


# --------------------------------------------------------------------------
# digit tables

def _sign_digits(table, lo, hi, slot):
    """0 where f = +1, 1 where f = -1 on [lo, hi); anything else is an error."""
    sl = slice(lo - table.lo, hi - table.lo)
    if table.exact:
        e = table.exponents[sl].astype(np.int64)
        L = table.order
        bad = (2 * e) % L != 0
        if table.zero_mask is not None:
            bad |= table.zero_mask[sl]
        digits = (2 * e // L).astype(np.uint8) if L > 1 else np.zeros(len(e), np.uint8)
    else:
        v = table.values[sl]
        plus, minus = np.abs(v - 1) <= 1e-12, np.abs(v + 1) <= 1e-12
        bad = ~(plus | minus)
        digits = minus.astype(np.uint8)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise PatternError(f"f{slot}({lo + i}) = {table.values[lo - table.lo + i]:.6g} "
                           f"is not +1 or -1")
    return digits


class _Engine:
    """Joint digit histogram plus fused expansion histograms for one shift vector."""

    def __init__(self, digits, radices, starts, threads=1):
        self.digits = digits               # list of uint8 arrays indexed from m = 1
        self.radices = np.array(radices, dtype=np.int64)
        self.starts = np.array(starts, dtype=np.int64)
        self.threads = threads
        self.exps = [np.ascontiguousarray(d, dtype=np.uint16) for d in digits]
        k = len(digits)
        self.L = _lcm(*radices)
        # term t <-> exponent vector r (slot 0 fastest)
        terms = list(itertools.product(*(range(r) for r in reversed(radices))))
        self.r = np.array([t[::-1] for t in terms], dtype=np.int64).reshape(len(terms), k)
        scale = np.array([self.L // r for r in radices], dtype=np.int64)
        self.mults = np.ascontiguousarray(self.r * scale)
        self.active = np.ascontiguousarray((self.r != 0).astype(np.uint8))
        self.width = int(sum((r - 1) * (r - 1) * s for r, s in zip(radices, scale))) + 1
        self.joint = np.zeros(int(np.prod(self.radices)), dtype=np.int64)
        self.hist = np.zeros((len(terms), self.width), dtype=np.int64)
        self.done = 0

    def extend(self, M):
        if M <= self.done:
            return
        starts = self.starts + self.done
        count = M - self.done
        self.joint += kernels.joint_hist(self.digits, starts, self.radices, count, self.threads)
        self.hist += kernels.exact_corr_hist(self.exps, [None] * len(self.exps), starts,
                                             self.mults, self.active, self.width, count,
                                             self.threads)
        self.done = M

    def code(self, digits):
        c, place = 0, 1
        for d, r in zip(digits, self.radices):
            c += int(d) * place
            place *= int(r)
        return c

    def expansion_sum(self, digits):
        """sum_m prod_j (1/b_j) sum_{r_j} zeta_j^{-a_j r_j} f_j^{r_j}, times prod b_j.

        Each term's histogram is rotated by its weight's phase, then all are
        folded into one histogram mod L.
        """
        scale = np.array([self.L // int(r) for r in self.radices], dtype=np.int64)
        w = (self.r * (np.asarray(digits, dtype=np.int64) * scale)).sum(axis=1) % self.L
        folded = np.zeros(self.L, dtype=np.int64)
        h = np.arange(self.width, dtype=np.int64)
        for t in range(len(w)):
            np.add.at(folded, (h - w[t]) % self.L, self.hist[t])
        return phase_sum(folded, self.L)


def _sign_engine(query, tables, threads):
    shifts = query.shifts()
    M = query.M
    digits, starts = [], []
    for j, (s, t) in enumerate(zip(shifts, tables)):
        lo, hi = 1 + s, M + s + 1
        if not t.covers(lo, hi):
            raise PatternError(f"table for f{j} covers [{t.lo}, {t.hi}) "
                               f"but [{lo}, {hi}) is needed")
        digits.append(_sign_digits(t, lo, hi, j))
        starts.append(0)
    return _Engine(digits, (2,) * len(digits), starts, threads)


def _residue_engine(query, block, threads):
    shifts = query.shifts()
    M = query.M
    digits = []
    for j, (s, b, c) in enumerate(zip(shifts, query.moduli, query.counters)):
        lo, hi = 1 + s, M + s + 1
        if lo < 1:
            raise PatternError(f"slot {j} reaches the argument {lo}, where {c} is undefined")
        if not block.covers(lo, hi):
            raise PatternError(f"sieve covers [{block.lo}, {block.hi}) but [{lo}, {hi}) is needed")
        src = block.omega if c == "omega" else block.big_omega
        digits.append((src[lo - block.lo:hi - block.lo] % b).astype(np.uint8))
    return _Engine(digits, query.moduli, [0] * len(digits), threads)


def _result(query, engine, pattern):
    if query.mode == "sign":
        d = tuple((1 - e) // 2 for e in pattern)
        q = PatternQuery(query.mode, query.family, query.point, query.M, eps=pattern,
                         functions=query.functions)
    else:
        d = tuple(pattern)
        q = PatternQuery(query.mode, query.family, query.point, query.M, moduli=query.moduli,
                         residues=pattern, counters=query.counters)
    M = engine.done
    count = int(engine.joint[engine.code(d)])
    z = engine.expansion_sum(d) / (math.prod(int(r) for r in engine.radices) * M)
    return PatternDensityResult(query=q, density=count / M, expansion_density=z.real,
                                target=query.target, count=count, expansion_imag=z.imag)


def _sign_tables(functions, family_shifts, M):
    smin = min(min(s) for s in family_shifts)
    smax = max(max(s) for s in family_shifts)
    return build_tables(functions, min(1, 1 + smin), M + max(smax, 0) + 1)


def sign_pattern_density(query, threads=1, tables=None):
    """Density of m <= M with f_0(m) = eps_0 and f_j(m + p_j(n)) = eps_j for all j."""
    if query.mode != "sign":
        raise PatternError("sign_pattern_density needs a sign-mode query")
    if tables is None:
        tables = _sign_tables(query.functions, [query.shifts()], query.M)
    engine = _sign_engine(query, tables, threads)
    engine.extend(query.M)
    return _result(query, engine, query.eps)


def residue_pattern_density(query, threads=1, block=None):
    """Density of m <= M with [counter_j(m + p_j(n))]_{b_j} = a_j for all j."""
    if query.mode != "residue":
        raise PatternError("residue_pattern_density needs a residue-mode query")
    if block is None:
        block = build_block(1, query.M + max(max(query.shifts()), 0) + 1)
    engine = _residue_engine(query, block, threads)
    engine.extend(query.M)
    return _result(query, engine, query.residues)


def pattern_densities(query, threads=1, tables=None, block=None):
    """Results for every pattern of the query's shape at its shift vector, one pass."""
    if query.mode == "sign":
        tables = tables or _sign_tables(query.functions, [query.shifts()], query.M)
        engine = _sign_engine(query, tables, threads)
    else:
        block = block or build_block(1, query.M + max(max(query.shifts()), 0) + 1)
        engine = _residue_engine(query, block, threads)
    engine.extend(query.M)
    return [_result(query, engine, p) for p in all_patterns(query)]


# --------------------------------------------------------------------------
# pointwise identities

def _polydiv_exact(num, den):
    """Quotient of integer polynomials (coefficients low to high), den monic."""
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num[:len(den) - 1]):
        raise ArithmeticError("inexact division")
    return q


@lru_cache(maxsize=None)
def cyclotomic(b):
    """Integer coefficients of Phi_b, lowest degree first."""
    poly = [-1] + [0] * (b - 1) + [1]              # x^b - 1
    for d in range(1, b):
        if b % d == 0:
            poly = _polydiv_exact(poly, cyclotomic(d))
    return tuple(poly)


@lru_cache(maxsize=None)
def _reduction(b):
    # row k: coordinates of zeta^k in the basis 1, zeta, ..., zeta^(phi(b)-1)
    phi = len(cyclotomic(b)) - 1
    rows = []
    for k in range(b):
        v = [0] * (k + 1)
        v[k] = 1
        for i in range(k, phi - 1, -1):
            c = v[i]
            if c:
                for j, d in enumerate(cyclotomic(b)):
                    v[i - phi + j] -= c * d
        rows.append((v + [0] * phi)[:phi])
    return np.array(rows, dtype=np.int64)


def expanded_residue_indicator(exponents, b, a):
    """b times (1/b) sum_r zeta^{-a r} f(n)^r with zeta = e(1/b), f(n) = zeta^exponents[n].

    Returns ``(exact, z)``: ``exact`` holds integer coordinates of the sum in
    the basis 1, zeta, ..., zeta^(phi(b)-1) of Z[zeta] (so the identity is a
    comparison of integers), ``z`` the complex value divided by b.
    """
    e = np.asarray(exponents, dtype=np.int64)
    phases = np.outer(e - a, np.arange(b, dtype=np.int64)) % b
    hist = np.zeros((len(e), b), dtype=np.int64)
    for k in range(b):
        hist[:, k] = (phases == k).sum(axis=1)
    exact = hist @ _reduction(b)
    z = unit_roots(b)[phases].sum(axis=1) / b
    return exact, z


def expanded_sign_indicator(values, eps):
    return (1 + eps * np.asarray(values)) / 2


# --------------------------------------------------------------------------
# scans

@dataclass
class PatternScan:
    template: PatternQuery
    box: LatticeBox
    M_grid: tuple
    results: dict = field(default_factory=dict)      # (point, M) -> list of results
    errors: dict = field(default_factory=dict)       # point -> message
    summary: list = field(default_factory=list)      # per M, template pattern
    summary_by_pattern: dict = field(default_factory=dict)

    def rows(self):
        for (pt, M), res in self.results.items():
            for r in res:
                yield pt, M, r


def pattern_scan(template, box, window, threads=1):
    """Densities of every pattern for every n in the box and M in the window.

    Summary per M: E_n |density(n) - target| for the template's pattern.
    Points that fail are recorded in ``errors`` and skipped.
    """
    if isinstance(box, str):
        box = LatticeBox.parse(box)
    if not isinstance(window, EvaluationWindow):
        window = EvaluationWindow(tuple(window))
    family = template.family
    if family is None:
        raise PatternError("a scan needs a shift family")
    if box.arity != family.arity:
        raise PatternError(f"box has arity {box.arity}, family has arity {family.arity}")
    points = list(box.points())
    if not points:
        raise PatternError("empty box")
    Mmax = window.M_grid[-1]
    all_shifts = [(0,) + tuple(family.shifts(p)) for p in points]
    smax = max(max(s) for s in all_shifts)
    if template.mode == "sign":
        tables = _sign_tables(template.functions, all_shifts, Mmax)
    else:
        block = build_block(1, Mmax + max(smax, 0) + 1)
    scan = PatternScan(template=template, box=box, M_grid=window.M_grid)
    for pt in points:
        if template.mode == "sign":
            q = PatternQuery("sign", family, pt, Mmax, eps=template.eps,
                             functions=template.functions)
        else:
            q = PatternQuery("residue", family, pt, Mmax, moduli=template.moduli,
                             residues=template.residues, counters=template.counters)
        try:
            engine = (_sign_engine(q, tables, threads) if q.mode == "sign"
                      else _residue_engine(q, block, threads))
            for M in window.M_grid:
                engine.extend(M)
                scan.results[(pt, M)] = [_result(q, engine, p) for p in all_patterns(q)]
        except PatternError as exc:
            scan.errors[pt] = str(exc)
    good = [pt for pt in points if pt not in scan.errors]
    labels = [pattern_label(template.mode, p) for p in all_patterns(template)]
    for label in labels:
        scan.summary_by_pattern[label] = []
    for M in window.M_grid:
        if not good:
            scan.summary.append(math.nan)
            continue
        for i, label in enumerate(labels):
            dev = [abs(scan.results[(pt, M)][i].density - template.target) for pt in good]
            scan.summary_by_pattern[label].append(math.fsum(dev) / len(dev))
        scan.summary.append(scan.summary_by_pattern[template.label][-1])
    return scan
