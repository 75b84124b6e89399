"""Segmented sieve for omega, Omega, Moebius and Liouville over integer ranges."""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path

import numpy as np

from chowlab._backend import kernels

DEFAULT_SEGMENT = 1 << 22
CACHE_ENV = "CHOWLAB_CACHE_DIR"

_MAGIC = b"CHWLBLK\0"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQQ")


class SieveError(ValueError):
    pass


def primes_up_to(N, segment=DEFAULT_SEGMENT):
    """All primes p <= N as a sorted int64 array (empty for N < 2)."""
    N = int(N)
    if N < 2:
        return np.zeros(0, dtype=np.int64)
    root = isqrt(N)
    small = np.ones(root + 1, dtype=bool)
    small[:2] = False
    for p in range(2, isqrt(root) + 1):
        if small[p]:
            small[p * p::p] = False
    base = np.flatnonzero(small).astype(np.int64)
    if root >= N:
        return base
    chunks = [base]
    lo = root + 1
    while lo <= N:
        hi = min(N + 1, lo + segment)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            first = max(p * p, -(-lo // p) * p)
            flags[first - lo::p] = False
        chunks.append(np.flatnonzero(flags).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(chunks)


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple

    def value(self):
        out = 1
        for p, e in self.factors:
            out *= p ** e
        return out

    @property
    def omega(self):
        return len(self.factors)

    @property
    def big_omega(self):
        return sum(e for _, e in self.factors)


def factor(n):
    """Prime factorization by plain trial division (2, 3, then 6k +- 1).

    Deliberately shares nothing with the sieve so it can serve as its oracle.
    """
    n = original = int(n)
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    i = 5
    while i * i <= n:
        for p in (i, i + 2):
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
        i += 6
    if n > 1:
        out.append((n, 1))
    return Factorization(n=original, factors=tuple(out))


@dataclass(frozen=True, eq=False)
class SievedBlock:
    """Arithmetic data for the integers lo <= n < hi.

    Arrays are indexed by ``n - lo``.
    """

    lo: int
    hi: int
    omega: np.ndarray
    big_omega: np.ndarray
    squarefree: np.ndarray
    mu: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)

    def __len__(self):
        return self.hi - self.lo

    def covers(self, lo, hi):
        return self.lo <= lo and hi <= self.hi

    def index(self, n):
        if not self.lo <= n < self.hi:
            raise IndexError(f"{n} outside block [{self.lo}, {self.hi})")
        return n - self.lo

    def __eq__(self, other):
        if not isinstance(other, SievedBlock):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi) and all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("omega", "big_omega", "squarefree", "mu", "lam"))


def _required_bound(hi):
    return isqrt(hi - 1) if hi > 1 else 0


def _check_primes(primes, hi):
    need = _required_bound(hi)
    if need < 2:
        return
    have = int(primes[-1]) if len(primes) else 1
    if have >= need:
        return
    # the list may stop short of need only if no prime lies in (have, need]
    if len(primes_up_to(need)) != int(np.searchsorted(primes, need, side="right")):
        raise SieveError(f"prime list must contain all primes <= {need} "
                         f"(largest supplied: {have})")


def _from_counts(lo, hi, omega, big_omega, sqf):
    sqf = sqf.astype(bool)
    parity_o = (omega & 1).astype(np.int8)
    mu = np.where(sqf, 1 - 2 * parity_o, 0).astype(np.int8)
    lam = (1 - 2 * (big_omega & 1)).astype(np.int8)
    return SievedBlock(lo=lo, hi=hi, omega=omega, big_omega=big_omega,
                       squarefree=sqf, mu=mu, lam=lam)


def build_block(lo, hi, primes=None, segment=DEFAULT_SEGMENT):
    """Sieve [lo, hi) segment by segment.

    ``primes`` must include every prime <= isqrt(hi - 1); it is computed when
    omitted.
    """
    lo, hi = int(lo), int(hi)
    if lo < 1:
        raise SieveError(f"lo must be >= 1, got {lo}")
    if hi <= lo:
        raise SieveError(f"empty range [{lo}, {hi})")
    if primes is None:
        primes = primes_up_to(max(2, _required_bound(hi)))
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    _check_primes(primes, hi)
    parts = []
    start = lo
    while start < hi:
        stop = min(hi, start + segment)
        parts.append(kernels.sieve_segment(start, stop, primes))
        start = stop
    if len(parts) == 1:
        omega, big, sqf = parts[0]
    else:
        omega, big, sqf = (np.concatenate(x) for x in zip(*parts))
    return _from_counts(lo, hi, omega, big, sqf)


def save_block(block, path):
    """Little-endian binary dump: header (magic, version, lo, hi) then arrays."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, block.lo, block.hi))
        fh.write(block.omega.astype("<u1").tobytes())
        fh.write(block.big_omega.astype("<u1").tobytes())
        fh.write(np.packbits(block.squarefree, bitorder="little").tobytes())


def load_block(path):
    raw = Path(path).read_bytes()
    magic, version, lo, hi = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _FORMAT_VERSION:
        raise SieveError(f"{path}: not a block file of format version {_FORMAT_VERSION}")
    n = hi - lo
    off = _HEADER.size
    omega = np.frombuffer(raw, dtype="<u1", count=n, offset=off).copy()
    big = np.frombuffer(raw, dtype="<u1", count=n, offset=off + n).copy()
    bits = np.frombuffer(raw, dtype=np.uint8, offset=off + 2 * n)
    sqf = np.unpackbits(bits, count=n, bitorder="little")
    return _from_counts(lo, hi, omega, big, sqf)


def cached_block(lo, hi, cache_dir=None, segment=DEFAULT_SEGMENT):
    """build_block with an optional on-disk cache (``$CHOWLAB_CACHE_DIR``)."""
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return build_block(lo, hi, segment=segment)
    path = Path(cache_dir) / f"block_{lo}_{hi}.bin"
    if path.exists():
        return load_block(path)
    block = build_block(lo, hi, segment=segment)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    save_block(block, tmp)
    tmp.replace(path)
    return block
