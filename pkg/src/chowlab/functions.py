"""Bounded multiplicative functions: specs, Dirichlet characters, evaluation.

A spec is a small immutable expression tree.  Functions whose values are
roots of unity (or zero) of a known order L are tabulated exactly as an
exponent array mod L plus a zero mask; complex values are produced only
when asked for.  Every function is extended to the integers by
f(-n) = f(n) and f(0) = 0.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, reduce

import numpy as np

from chowlab.sieve import build_block, factor

MAX_EXACT_ORDER = 1 << 15
UNIT_TOL = 1e-12


class SpecError(ValueError):
    """Malformed or out-of-class function spec."""


def unit_root(k, L):
    """e(k / L), exact at multiples of a quarter turn."""
    k %= L
    q, r = divmod(4 * k, L)
    if r == 0:
        return (1, 1j, -1, -1j)[q]
    return cmath.exp(2j * math.pi * k / L)


def unit_roots(L):
    return np.array([unit_root(k, L) for k in range(L)], dtype=np.complex128)


def _lcm(*xs):
    return reduce(lambda a, b: a * b // math.gcd(a, b), xs, 1)


# --------------------------------------------------------------------------
# specs

class FunctionSpec:
    """Base class of the function expression tree."""

    #: order L of the value group when all non-zero values are L-th roots of unity
    order = None

    def prime_power(self, p, e):
        """f(p^e) as a complex number."""
        raise NotImplementedError

    def prime_values(self, primes):
        """Vectorised f(p) for an int array of primes."""
        return np.array([self.prime_power(int(p), 1) for p in primes], dtype=np.complex128)

    def value(self, n):
        """f(n) from the trial-division factorization of |n| (slow; oracle use)."""
        n = abs(int(n))
        if n == 0:
            return 0
        out = 1
        for p, e in factor(n).factors:
            out *= self.prime_power(p, e)
        return out

    def to_json(self):
        raise NotImplementedError

    def dumps(self):
        return json.dumps(self.to_json(), separators=(",", ":"))

    def __mul__(self, other):
        return Product((self, other))


@dataclass(frozen=True)
class Liouville(FunctionSpec):
    order = 2

    def prime_power(self, p, e):
        return (-1) ** e

    def prime_values(self, primes):
        return np.full(len(primes), -1.0 + 0j)

    def to_json(self):
        return "liouville"


@dataclass(frozen=True)
class Mobius(FunctionSpec):
    order = 2

    def prime_power(self, p, e):
        return -1 if e == 1 else 0

    def prime_values(self, primes):
        return np.full(len(primes), -1.0 + 0j)

    def to_json(self):
        return "mobius"


@dataclass(frozen=True)
class One(FunctionSpec):
    order = 1

    def prime_power(self, p, e):
        return 1

    def prime_values(self, primes):
        return np.ones(len(primes), dtype=np.complex128)

    def to_json(self):
        return "one"


@dataclass(frozen=True)
class RootOfUnity(FunctionSpec):
    """f_b: equal to zeta = e(1/b) at every prime power, so f_b(n) = zeta^omega(n)."""

    b: int

    def __post_init__(self):
        if int(self.b) < 1:
            raise SpecError(f"root_of_unity order must be >= 1, got {self.b}")

    @property
    def order(self):
        return self.b

    def prime_power(self, p, e):
        return unit_root(1, self.b)

    def prime_values(self, primes):
        return np.full(len(primes), unit_root(1, self.b), dtype=np.complex128)

    def to_json(self):
        return {"root_of_unity": self.b}


@dataclass(frozen=True)
class CompleteRootOfUnity(FunctionSpec):
    """f'_b: zeta^j at p^j, so f'_b(n) = zeta^Omega(n)."""

    b: int

    def __post_init__(self):
        if int(self.b) < 1:
            raise SpecError(f"complete_root_of_unity order must be >= 1, got {self.b}")

    @property
    def order(self):
        return self.b

    def prime_power(self, p, e):
        return unit_root(e, self.b)

    def prime_values(self, primes):
        return np.full(len(primes), unit_root(1, self.b), dtype=np.complex128)

    def to_json(self):
        return {"complete_root_of_unity": self.b}


@dataclass(frozen=True)
class Archimedean(FunctionSpec):
    """n -> n^{it}."""

    t: float

    def prime_power(self, p, e):
        return cmath.exp(1j * self.t * e * math.log(p))

    def prime_values(self, primes):
        return np.exp(1j * self.t * np.log(np.asarray(primes, dtype=np.float64)))

    def value(self, n):
        n = abs(int(n))
        return 0 if n == 0 else cmath.exp(1j * self.t * math.log(n))

    def to_json(self):
        return {"archimedean": self.t}


@dataclass(frozen=True)
class Product(FunctionSpec):
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise SpecError("product of no factors")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def order(self):
        orders = [f.order for f in self.factors]
        if any(o is None for o in orders):
            return None
        return _lcm(*orders)

    def prime_power(self, p, e):
        return math.prod(f.prime_power(p, e) for f in self.factors)

    def prime_values(self, primes):
        out = np.ones(len(primes), dtype=np.complex128)
        for f in self.factors:
            out = out * f.prime_values(primes)
        return out

    def value(self, n):
        return math.prod(f.value(n) for f in self.factors)

    def to_json(self):
        return {"product": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class Power(FunctionSpec):
    base: FunctionSpec
    r: int

    def __post_init__(self):
        if int(self.r) < 1:
            raise SpecError(f"power exponent must be >= 1, got {self.r}")

    @property
    def order(self):
        return self.base.order

    def prime_power(self, p, e):
        return self.base.prime_power(p, e) ** self.r

    def prime_values(self, primes):
        return self.base.prime_values(primes) ** self.r

    def value(self, n):
        return self.base.value(n) ** self.r

    def to_json(self):
        return {"power": [self.base.to_json(), self.r]}


@dataclass(frozen=True)
class Conjugate(FunctionSpec):
    base: FunctionSpec

    @property
    def order(self):
        return self.base.order

    def prime_power(self, p, e):
        return complex(self.base.prime_power(p, e)).conjugate()

    def prime_values(self, primes):
        return np.conj(self.base.prime_values(primes))

    def value(self, n):
        return complex(self.base.value(n)).conjugate()

    def to_json(self):
        return {"conjugate": self.base.to_json()}


@dataclass(frozen=True)
class PrimePowerTable(FunctionSpec):
    """User-supplied values: ``default[e-1]`` at p^e unless ``overrides`` has p.

    The last entry of a value list repeats for larger exponents.
    """

    default: tuple
    overrides: tuple = ()

    def __post_init__(self):
        default = tuple(complex(v) for v in self.default)
        overrides = tuple((int(p), tuple(complex(v) for v in vals))
                          for p, vals in self.overrides)
        if not default:
            raise SpecError("table spec needs at least one default value")
        for v in default + tuple(v for _, vals in overrides for v in vals):
            if abs(v) > 1 + UNIT_TOL:
                raise SpecError(f"table value {v} lies outside the unit disc")
        for p, vals in overrides:
            if not vals:
                raise SpecError(f"empty value list for prime {p}")
            if factor(p).factors != ((p, 1),):
                raise SpecError(f"table override key {p} is not prime")
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "overrides", overrides)

    @cached_property
    def _lookup(self):
        return dict(self.overrides)

    def prime_power(self, p, e):
        vals = self._lookup.get(p, self.default)
        return vals[min(e, len(vals)) - 1]

    def to_json(self):
        enc = lambda v: [v.real, v.imag]  # noqa: E731
        return {"table": {"default": [enc(v) for v in self.default],
                          "primes": {str(p): [enc(v) for v in vals]
                                     for p, vals in self.overrides}}}


# --------------------------------------------------------------------------
# Dirichlet characters

def _prime_power_parts(q):
    return factor(q).factors if q > 1 else ()


def _primitive_root_prime(p):
    if p == 2:
        return 1
    phi = p - 1
    qs = [r for r, _ in factor(phi).factors]
    for g in range(2, p):
        if all(pow(g, phi // r, p) != 1 for r in qs):
            return g
    raise ArithmeticError(f"no primitive root mod {p}")


def _component_generators(p, e):
    """Generators and their orders for (Z/p^e)*."""
    pe = p ** e
    if p != 2:
        g = _primitive_root_prime(p)
        if e > 1 and pow(g, p - 1, p * p) == 1:
            g += p
        return [(g % pe, (p - 1) * p ** (e - 1))]
    if e == 1:
        return []
    if e == 2:
        return [(pe - 1, 2)]
    return [(pe - 1, 2), (5, 1 << (e - 2))]


@lru_cache(maxsize=256)
def _group_structure(q):
    """Generators of (Z/q)* with orders, and a discrete-log table.

    Returns (gens, orders, logs) where logs[n] is the exponent vector of n on
    the generators, or None when gcd(n, q) > 1.
    """
    gens, orders, comps = [], [], []
    for p, e in _prime_power_parts(q):
        pe = p ** e
        for g, o in _component_generators(p, e):
            # CRT lift: g mod p^e, 1 mod the rest of q
            rest = q // pe
            if rest == 1:
                lifted = g % q
            else:
                lifted = (g * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % q
            gens.append(lifted)
            orders.append(o)
            comps.append(pe)
    logs = [None] * q
    for vec in itertools.product(*(range(o) for o in orders)):
        n = 1 % q
        for g, k in zip(gens, vec):
            n = n * pow(g, k, q) % q
        logs[n] = vec
    if q == 1:
        logs[0] = ()
    return tuple(gens), tuple(orders), tuple(logs)


@dataclass(frozen=True)
class DirichletCharacter(FunctionSpec):
    """Character mod q given by its exponent vector on the generators of (Z/q)*.

    chi(g_i) = e(vector[i] / ord(g_i)); for 2^k with k >= 3 the generators are
    -1 and 5, for odd prime powers a primitive root.
    """

    q: int
    vector: tuple

    def __post_init__(self):
        q = int(self.q)
        if q < 1:
            raise SpecError(f"character modulus must be >= 1, got {q}")
        _, orders, _ = _group_structure(q)
        vec = tuple(int(v) for v in self.vector)
        if len(vec) != len(orders):
            raise SpecError(f"mod {q} a character needs {len(orders)} exponents, got {len(vec)}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "vector", tuple(v % o for v, o in zip(vec, orders)))

    @cached_property
    def order(self):
        _, orders, _ = _group_structure(self.q)
        return _lcm(*(o // math.gcd(o, v) for v, o in zip(self.vector, orders)))

    @property
    def is_principal(self):
        return all(v == 0 for v in self.vector)

    @cached_property
    def residue_exponents(self):
        """int array of length q: exponent mod order at each residue, -1 where gcd > 1."""
        _, orders, logs = _group_structure(self.q)
        L = self.order
        out = np.full(self.q, -1, dtype=np.int64)
        for n, vec in enumerate(logs):
            if vec is None:
                continue
            # sum_i v_i * log_i / ord_i, expressed in units of 1/L
            out[n] = sum(v * k * L // o for v, k, o in zip(self.vector, vec, orders)) % L
        return out

    def __call__(self, n):
        k = int(self.residue_exponents[int(n) % self.q])
        return 0 if k < 0 else unit_root(k, self.order)

    def prime_power(self, p, e):
        return self.__call__(p) ** e

    def prime_values(self, primes):
        k = self.residue_exponents[np.asarray(primes, dtype=np.int64) % self.q]
        vals = unit_roots(self.order)[np.maximum(k, 0)]
        return np.where(k < 0, 0, vals)

    def value(self, n):
        return 0 if n == 0 else self.__call__(abs(n))

    def to_json(self):
        return {"character": [self.q, list(self.vector)]}


def character_group(q):
    """All phi(q) characters mod q, principal first; orthogonality is checked."""
    q = int(q)
    if q < 1:
        raise SpecError(f"modulus must be >= 1, got {q}")
    _, orders, _ = _group_structure(q)
    chars = [DirichletCharacter(q, vec) for vec in itertools.product(*(range(o) for o in orders))]
    V = np.array([[c(n) for n in range(q)] for c in chars], dtype=np.complex128)
    gram = V @ V.conj().T
    phi = sum(1 for n in range(q) if math.gcd(n, q) == 1)
    if len(chars) != phi or np.abs(gram - phi * np.eye(len(chars))).max() > 1e-9:
        raise ArithmeticError(f"character table mod {q} failed orthogonality")
    return chars


# --------------------------------------------------------------------------
# parsing

_SIMPLE = {"liouville": Liouville, "mobius": Mobius, "one": One}


def from_json(obj):
    if isinstance(obj, str):
        if obj in _SIMPLE:
            return _SIMPLE[obj]()
        raise SpecError(f"unknown function {obj!r}")
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecError(f"malformed spec {obj!r}")
    (key, arg), = obj.items()
    try:
        if key in _SIMPLE:
            return _SIMPLE[key]()
        if key == "root_of_unity":
            return RootOfUnity(int(arg))
        if key == "complete_root_of_unity":
            return CompleteRootOfUnity(int(arg))
        if key == "archimedean":
            return Archimedean(float(arg))
        if key == "character":
            q, vec = arg
            if isinstance(vec, int):
                return character_group(int(q))[vec]
            return DirichletCharacter(int(q), tuple(vec))
        if key == "product":
            return Product(tuple(from_json(a) for a in arg))
        if key == "power":
            base, r = arg
            return Power(from_json(base), int(r))
        if key == "conjugate":
            return Conjugate(from_json(arg))
        if key == "table":
            dec = lambda v: complex(*v) if isinstance(v, list) else complex(v)  # noqa: E731
            return PrimePowerTable(
                tuple(dec(v) for v in arg["default"]),
                tuple((int(p), tuple(dec(v) for v in vals))
                      for p, vals in arg.get("primes", {}).items()))
    except (TypeError, ValueError, IndexError, KeyError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad arguments for {key!r}: {arg!r}") from exc
    raise SpecError(f"unknown spec kind {key!r}")


def parse_spec(text):
    """Parse a spec from JSON or the short forms ``liouville``, ``root_of_unity:3``,
    ``complete_root_of_unity:3``, ``archimedean:0.5``, ``character:4:1``."""
    if isinstance(text, FunctionSpec):
        return text
    if not isinstance(text, str):
        return from_json(text)
    text = text.strip()
    if text[:1] in "{[\"":
        return from_json(json.loads(text))
    head, *rest = text.split(":")
    try:
        if head in _SIMPLE and not rest:
            return _SIMPLE[head]()
        if head in ("root_of_unity", "f_b") and len(rest) == 1:
            return RootOfUnity(int(rest[0]))
        if head in ("complete_root_of_unity", "f'_b") and len(rest) == 1:
            return CompleteRootOfUnity(int(rest[0]))
        if head == "archimedean" and len(rest) == 1:
            return Archimedean(float(rest[0]))
        if head in ("character", "chi") and len(rest) == 2:
            return character_group(int(rest[0]))[int(rest[1])]
    except (ValueError, IndexError) as exc:
        raise SpecError(f"cannot parse function {text!r}") from exc
    raise SpecError(f"cannot parse function {text!r}")


# --------------------------------------------------------------------------
# tables

@dataclass(frozen=True, eq=False)
class EvaluatedTable:
    """Values of a function on lo <= n < hi.

    Exact tables carry ``exponents`` (uint16, mod ``order``) and an optional
    ``zero_mask``; others carry complex ``raw``.
    """

    spec: FunctionSpec | None
    lo: int
    hi: int
    order: int | None = None
    exponents: np.ndarray | None = field(default=None, repr=False)
    zero_mask: np.ndarray | None = field(default=None, repr=False)
    raw: np.ndarray | None = field(default=None, repr=False)

    @property
    def exact(self):
        return self.exponents is not None

    def __len__(self):
        return self.hi - self.lo

    @cached_property
    def values(self):
        if not self.exact:
            return self.raw
        vals = unit_roots(self.order)[self.exponents]
        if self.zero_mask is not None:
            vals[self.zero_mask] = 0
        return vals

    @cached_property
    def mask_u8(self):
        return None if self.zero_mask is None else self.zero_mask.view(np.uint8)

    def covers(self, lo, hi):
        return self.lo <= lo and hi <= self.hi

    def __getitem__(self, n):
        return self.values[n - self.lo]

    @classmethod
    def from_values(cls, values, lo=1, spec=None):
        """Wrap an arbitrary unit-disc sequence (no multiplicativity implied)."""
        values = np.ascontiguousarray(values, dtype=np.complex128)
        return cls(spec=spec, lo=int(lo), hi=int(lo) + len(values), raw=values)


def _exact(spec, lo, hi, exps, mask=None, order=None):
    order = spec.order if order is None else order
    if mask is not None and not mask.any():
        mask = None
    return EvaluatedTable(spec=spec, lo=lo, hi=hi, order=order,
                          exponents=np.ascontiguousarray(exps, dtype=np.uint16),
                          zero_mask=mask)


def _table_by_sieve(spec, lo, hi):
    # per-prime-power walk for table specs
    ns = np.arange(lo, hi, dtype=np.int64)
    rem = ns.copy()
    vals = np.ones(hi - lo, dtype=np.complex128)
    from chowlab.sieve import primes_up_to
    for p in primes_up_to(math.isqrt(hi - 1)):
        p = int(p)
        idx = np.arange(-(-lo // p) * p - lo, hi - lo, p)
        if idx.size == 0:
            continue
        e = np.zeros(idx.size, dtype=np.int64)
        sub = rem[idx]
        while True:
            div = sub % p == 0
            if not div.any():
                break
            sub[div] //= p
            e[div] += 1
        rem[idx] = sub
        for ee in np.unique(e):
            vals[idx[e == ee]] *= spec.prime_power(p, int(ee))
    big = rem > 1
    if big.any():
        vals[big] *= spec.prime_values(rem[big])
    return vals


def evaluate(spec, block):
    """Tabulate ``spec`` over the block's range [block.lo, block.hi)."""
    return _evaluate(spec, block, block.lo, block.hi)


def _evaluate(spec, block, lo, hi):
    sl = slice(lo - block.lo, hi - block.lo)
    if isinstance(spec, Liouville):
        return _exact(spec, lo, hi, block.big_omega[sl] & 1)
    if isinstance(spec, Mobius):
        return _exact(spec, lo, hi, block.omega[sl] & 1, ~block.squarefree[sl])
    if isinstance(spec, One):
        return _exact(spec, lo, hi, np.zeros(hi - lo, dtype=np.uint16))
    if isinstance(spec, RootOfUnity):
        return _exact(spec, lo, hi, block.omega[sl] % spec.b)
    if isinstance(spec, CompleteRootOfUnity):
        return _exact(spec, lo, hi, block.big_omega[sl] % spec.b)
    if isinstance(spec, DirichletCharacter):
        k = spec.residue_exponents[np.arange(lo, hi, dtype=np.int64) % spec.q]
        return _exact(spec, lo, hi, np.maximum(k, 0), k < 0)
    if isinstance(spec, Archimedean):
        n = np.arange(lo, hi, dtype=np.float64)
        return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=np.exp(1j * spec.t * np.log(n)))
    if isinstance(spec, PrimePowerTable):
        return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=_table_by_sieve(spec, lo, hi))
    if isinstance(spec, Product):
        parts = [_evaluate(f, block, lo, hi) for f in spec.factors]
        L = spec.order
        if L is not None and L <= MAX_EXACT_ORDER:
            exps = np.zeros(hi - lo, dtype=np.int64)
            mask = np.zeros(hi - lo, dtype=bool)
            for t in parts:
                exps += t.exponents.astype(np.int64) * (L // t.order)
                if t.zero_mask is not None:
                    mask |= t.zero_mask
            return _exact(spec, lo, hi, exps % L, mask, L)
        vals = np.ones(hi - lo, dtype=np.complex128)
        for t in parts:
            vals = vals * t.values
        return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=vals)
    if isinstance(spec, Power):
        base = _evaluate(spec.base, block, lo, hi)
        if base.exact:
            exps = base.exponents.astype(np.int64) * spec.r % base.order
            return _exact(spec, lo, hi, exps, base.zero_mask, base.order)
        return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=base.values ** spec.r)
    if isinstance(spec, Conjugate):
        base = _evaluate(spec.base, block, lo, hi)
        if base.exact:
            exps = (-base.exponents.astype(np.int64)) % base.order
            return _exact(spec, lo, hi, exps, base.zero_mask, base.order)
        return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=np.conj(base.values))
    raise SpecError(f"cannot evaluate {spec!r}")


def positive_block_for(lo, hi):
    """Smallest block [1, H) serving the signed range [lo, hi)."""
    H = max(hi, 1 - lo + 1, 2)
    return 1, H


def tabulate(spec, lo, hi, block=None):
    """Tabulate ``spec`` on [lo, hi), any signs, via f(-n) = f(n), f(0) = 0."""
    spec = parse_spec(spec)
    lo, hi = int(lo), int(hi)
    if hi <= lo:
        raise SpecError(f"empty range [{lo}, {hi})")
    need_lo, need_hi = (lo, hi) if lo >= 1 else positive_block_for(lo, hi)
    if block is None or not block.covers(need_lo, need_hi):
        block = build_block(need_lo, need_hi)
    if lo >= 1:
        return _evaluate(spec, block, lo, hi)
    pos = _evaluate(spec, block, 1, need_hi)
    n = np.abs(np.arange(lo, hi, dtype=np.int64))
    idx = np.maximum(n - 1, 0)
    zero = n == 0
    if pos.exact:
        mask = zero if pos.zero_mask is None else (pos.zero_mask[idx] | zero)
        return _exact(spec, lo, hi, pos.exponents[idx], mask, pos.order)
    vals = pos.values[idx].copy()
    vals[zero] = 0
    return EvaluatedTable(spec=spec, lo=lo, hi=hi, raw=vals)


# --------------------------------------------------------------------------
# checks

@dataclass
class MultiplicativityReport:
    checked: int
    failures: list

    @property
    def ok(self):
        return not self.failures


def verify_multiplicative(table, samples=1000, seed=0):
    """Check f(mn) = f(m) f(n) on random coprime pairs with mn inside the table."""
    rng = np.random.default_rng(seed)
    lo, hi = max(table.lo, 1), table.hi
    if lo != 1 or hi < 3:
        raise SpecError("verify_multiplicative needs a table starting at 1")
    failures = []
    checked = 0
    attempts = 0
    while checked < samples and attempts < 50 * samples:
        attempts += 1
        m = int(rng.integers(1, max(2, math.isqrt(hi - 1)) + 1))
        n = int(rng.integers(1, (hi - 1) // m + 1))
        if m * n >= hi or math.gcd(m, n) != 1:
            continue
        checked += 1
        i, j, k = m - table.lo, n - table.lo, m * n - table.lo
        if table.exact:
            z = table.zero_mask
            zm = z is not None and bool(z[i] or z[j])
            zk = z is not None and bool(z[k])
            e = table.exponents
            ok = zm == zk and (zm or (int(e[k]) - int(e[i]) - int(e[j])) % table.order == 0)
        else:
            v = table.values
            ok = abs(v[k] - v[i] * v[j]) <= 1e-12
        if not ok:
            failures.append((m, n))
    return MultiplicativityReport(checked=checked, failures=failures)
