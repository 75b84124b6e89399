"""Shift families: integer polynomials in r variables and [n^c] sequences."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

INT64_MAX = (1 << 63) - 1


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; ``terms`` maps exponent vectors to non-zero coefficients."""

    arity: int
    terms: tuple  # sorted ((exponents, coeff), ...)

    def __post_init__(self):
        clean = {}
        for exps, c in dict(self.terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.arity or any(e < 0 for e in exps):
                raise FamilyError(f"bad exponent vector {exps} for arity {self.arity}")
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        object.__setattr__(self, "terms",
                           tuple(sorted((e, c) for e, c in clean.items() if c)))

    @classmethod
    def from_dict(cls, arity, terms):
        return cls(arity, tuple(terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        names = _var_names(self.arity)
        parts = []
        for exps, c in self.terms:
            mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(names, exps) if e)
            if not mono:
                parts.append(str(c))
            elif c in (1, -1):
                parts.append(("-" if c < 0 else "") + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    @property
    def degree(self):
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, n):
        return eval_poly(self, n)


def _var_names(arity):
    return ["n"] if arity == 1 else [f"n{i + 1}" for i in range(arity)]


def eval_poly(p, n):
    """Exact value of ``p`` at the integer vector ``n``.

    Raises OverflowError when a term or the total leaves the signed 64-bit range.
    """
    n = (n,) if isinstance(n, int) else tuple(n)
    if len(n) != p.arity:
        raise FamilyError(f"expected {p.arity} coordinates, got {len(n)}")
    total = 0
    for exps, c in p.terms:
        v = c
        for x, e in zip(n, exps):
            v *= int(x) ** e
        if abs(v) > INT64_MAX:
            raise OverflowError(f"term {c}*{exps} of {p} overflows at n={n}")
        total += v
    if abs(total) > INT64_MAX:
        raise OverflowError(f"{p} overflows at n={n}")
    return total


_FACTOR = re.compile(r"([a-z]\w*)(?:\^(\d+))?")


def parse_polynomial(text, arity=None):
    """Parse sums of terms ``c*n1^a*n2^b``; single-variable ``n`` means arity 1."""
    src = text.replace(" ", "")
    if not src:
        raise FamilyError("empty polynomial")
    pieces = re.findall(r"[+-]?[^+-]+", src)
    if "".join(pieces) != src:
        raise FamilyError(f"cannot parse polynomial {text!r}")
    parsed = []
    seen = set()
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        body = piece.lstrip("+-")
        coeff = 1
        facs = []
        for tok in body.split("*"):
            if tok.isdigit():
                coeff *= int(tok)
                continue
            m = _FACTOR.fullmatch(tok)
            if not m:
                raise FamilyError(f"cannot parse term {piece!r} in {text!r}")
            facs.append((m.group(1), int(m.group(2) or 1)))
            seen.add(m.group(1))
        parsed.append((sign * coeff, facs))
    index = _variable_index(seen, arity)
    r = arity if arity is not None else max(index.values(), default=0) + 1
    terms = {}
    for c, facs in parsed:
        exps = [0] * r
        for v, e in facs:
            exps[index[v]] += e
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + c
    return IntPolynomial.from_dict(r, terms)


def _variable_index(names, arity):
    if not names:
        return {}
    if names == {"n"}:
        if arity not in (None, 1):
            raise FamilyError("variable 'n' only allowed for arity 1")
        return {"n": 0}
    index = {}
    for v in names:
        m = re.fullmatch(r"n(\d+)", v)
        if not m or int(m.group(1)) < 1:
            raise FamilyError(f"unknown variable {v!r} (use n or n1, n2, ...)")
        index[v] = int(m.group(1)) - 1
    need = max(index.values()) + 1
    if arity is not None and need > arity:
        raise FamilyError(f"variable n{need} exceeds arity {arity}")
    return index


# ---------------------------------------------------------------------------
# independence over Q

@dataclass(frozen=True)
class Independence:
    certified: bool
    rank: int
    witness: tuple | None = None  # integers c with c0*1 + sum c_j p_j == 0


def _bareiss_rank(rows):
    """Rank by fraction-free elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, len(m)):
            for j in range(col + 1, ncols):
                m[i][j] = (m[i][j] * m[rank][col] - m[i][col] * m[rank][j]) // prev
            m[i][col] = 0
        prev = m[rank][col]
        rank += 1
    return rank


def _kernel_vector(cols):
    """Integer vector c != 0 with sum_i c_i * cols[i] == 0 (cols dependent)."""
    nrows = len(cols[0])
    ncols = len(cols)
    a = [[Fraction(cols[j][i]) for j in range(ncols)] for i in range(nrows)]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    free = next(c for c in range(ncols) if c not in pivots)
    vec = [Fraction(0)] * ncols
    vec[free] = Fraction(-1)
    for row, pc in enumerate(pivots):
        vec[pc] = a[row][free]
    den = math.lcm(*(v.denominator for v in vec))
    ints = [int(v * den) for v in vec]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


def check_independence(polys):
    """Decide whether {1, p_1, ..., p_l} is linearly independent over Q."""
    polys = list(polys)
    if not polys:
        return Independence(certified=True, rank=1)
    arity = polys[0].arity
    if any(p.arity != arity for p in polys):
        raise FamilyError("polynomials of different arity")
    one = IntPolynomial.from_dict(arity, {(0,) * arity: 1})
    family = [one] + polys
    monos = sorted({e for p in family for e, _ in p.terms})
    cols = [[dict(p.terms).get(e, 0) for e in monos] for p in family]
    rank = _bareiss_rank(cols)
    if rank == len(family):
        return Independence(certified=True, rank=rank)
    return Independence(certified=False, rank=rank, witness=_kernel_vector(cols))


# ---------------------------------------------------------------------------
# fractional powers

def fractional_shift(c, n):
    """floor(n^c), recomputed in extended precision near integers."""
    if c <= 0 or n < 1:
        raise FamilyError(f"need c > 0 and n >= 1, got c={c}, n={n}")
    x = float(n) ** c
    k = math.floor(x)
    if abs(x - round(x)) > 1e-9 * max(1.0, x):
        return k
    frac = Fraction(c)
    if frac.denominator <= 64:
        # exact: largest k with k^den <= n^num
        num, den = frac.numerator, frac.denominator
        target = n ** num
        k = int(round(x))
        while k ** den > target:
            k -= 1
        while (k + 1) ** den <= target:
            k += 1
        return k
    with mpmath.workdps(60):
        return int(mpmath.floor(mpmath.mpf(n) ** mpmath.mpf(c)))


# ---------------------------------------------------------------------------
# boxes and families

@dataclass(frozen=True)
class LatticeBox:
    bounds: tuple  # ((lo_1, hi_1), ..., (lo_r, hi_r)), inclusive

    def __post_init__(self):
        b = tuple((int(lo), int(hi)) for lo, hi in self.bounds)
        if not b:
            raise FamilyError("box needs at least one coordinate")
        for lo, hi in b:
            if lo < 1 or hi < lo:
                raise FamilyError(f"invalid box side [{lo}, {hi}]")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def parse(cls, text):
        """``"1:200"`` or ``"1:20,5:9"`` (inclusive)."""
        try:
            sides = []
            for part in text.split(","):
                lo, hi = part.split(":")
                sides.append((int(float(lo)), int(float(hi))))
        except ValueError as exc:
            raise FamilyError(f"cannot parse box {text!r}") from exc
        return cls(tuple(sides))

    @property
    def arity(self):
        return len(self.bounds)

    def __len__(self):
        return math.prod(hi - lo + 1 for lo, hi in self.bounds)

    def points(self):
        """Every lattice point once, last coordinate varying fastest."""
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.bounds))

    def __str__(self):
        return ",".join(f"{lo}:{hi}" for lo, hi in self.bounds)


@dataclass(frozen=True)
class ShiftFamily:
    """Either integer polynomials of common arity or fractional exponents."""

    polys: tuple = ()
    exponents: tuple = ()

    def __post_init__(self):
        if bool(self.polys) == bool(self.exponents):
            raise FamilyError("a family is either polynomial or fractional, and non-empty")
        if self.polys and len({p.arity for p in self.polys}) != 1:
            raise FamilyError("polynomials of different arity")
        if self.exponents:
            cs = tuple(float(c) for c in self.exponents)
            if any(c <= 0 for c in cs):
                raise FamilyError("fractional exponents must be positive")
            object.__setattr__(self, "exponents", cs)

    @property
    def kind(self):
        return "polynomial" if self.polys else "fractional"

    @property
    def size(self):
        return len(self.polys) or len(self.exponents)

    @property
    def arity(self):
        return self.polys[0].arity if self.polys else 1

    @property
    def independence(self):
        if self.kind == "fractional":
            return "not-applicable"
        return "certified" if check_independence(self.polys).certified else "dependent"

    def hypothesis_ok(self):
        """Polynomials: certified independent; fractional: distinct non-integers."""
        if self.kind == "polynomial":
            return self.independence == "certified"
        cs = self.exponents
        return len(set(cs)) == len(cs) and all(c != int(c) for c in cs)

    def shifts(self, point):
        point = tuple(point)
        if self.kind == "polynomial":
            return tuple(eval_poly(p, point) for p in self.polys)
        (n,) = point
        return tuple(fractional_shift(c, n) for c in self.exponents)

    def shift_range(self, box):
        """(min, max) over all shifts at all box points, with 0 included."""
        lo = hi = 0
        if self.kind == "fractional":
            (b,) = box.bounds
            for n in b:
                for s in self.shifts((n,)):
                    lo, hi = min(lo, s), max(hi, s)
            return lo, hi
        for pt in box.points():
            for s in self.shifts(pt):
                lo, hi = min(lo, s), max(hi, s)
        return lo, hi

    def to_json(self):
        if self.kind == "polynomial":
            return ",".join(str(p) for p in self.polys)
        return {"frac": list(self.exponents)}


def parse_family(obj, arity=None):
    """``"n,n^2"`` (polynomials) or ``{"frac": [1.5, 2.5]}`` / ``"frac:1.5,2.5"``."""
    if isinstance(obj, ShiftFamily):
        return obj
    if isinstance(obj, dict):
        if set(obj) != {"frac"}:
            raise FamilyError(f"unknown family literal {obj!r}")
        return ShiftFamily(exponents=tuple(obj["frac"]))
    text = str(obj).strip()
    if text.startswith("frac:"):
        return ShiftFamily(exponents=tuple(float(x) for x in text[5:].split(",")))
    if text.startswith("{"):
        import json
        return parse_family(json.loads(text), arity)
    polys = [parse_polynomial(part, arity) for part in text.split(",")]
    r = max(p.arity for p in polys)
    if arity is None and r > 1:
        polys = [parse_polynomial(part, r) for part in text.split(",")]
    return ShiftFamily(polys=tuple(polys))
