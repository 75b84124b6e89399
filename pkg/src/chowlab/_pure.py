"""Numpy implementations of the kernels in ``_core``.

Same signatures, same outputs (bit-identical for the integer kernels).
Used when the extension is not built or ``CHOWLAB_PURE_PYTHON`` is set.
"""
import numpy as np

BACKEND = "pure"

_CHUNK = 1 << 18


def sieve_segment(lo, hi, primes):
    size = hi - lo
    omega = np.zeros(size, dtype=np.uint8)
    big = np.zeros(size, dtype=np.uint8)
    sqf = np.ones(size, dtype=np.uint8)
    prod = np.ones(size, dtype=np.int64)
    top = hi - 1
    for p in primes:
        p = int(p)
        if p * p > top:
            break
        pk, level = p, 1
        while True:
            first = -(-lo // pk) * pk - lo
            sl = slice(first, None, pk)
            big[sl] += 1
            prod[sl] *= p
            if level == 1:
                omega[sl] += 1
            elif level == 2:
                sqf[sl] = 0
            if pk > top // p:
                break
            pk *= p
            level += 1
    extra = prod != np.arange(lo, hi, dtype=np.int64)
    omega += extra
    big += extra
    return omega, big, sqf


def exact_corr_hist(exps, masks, starts, mults, active, width, count, threads=1):
    k = len(exps)
    T = mults.shape[0]
    hist = np.zeros((T, width), dtype=np.int64)
    for lo in range(0, count, _CHUNK):
        hi = min(count, lo + _CHUNK)
        cols = [exps[j][starts[j] + lo:starts[j] + hi].astype(np.int64) for j in range(k)]
        zero = [None if masks[j] is None else masks[j][starts[j] + lo:starts[j] + hi] != 0
                for j in range(k)]
        for t in range(T):
            s = np.zeros(hi - lo, dtype=np.int64)
            keep = None
            for j in range(k):
                if mults[t, j]:
                    s += mults[t, j] * cols[j]
                if active[t, j] and zero[j] is not None:
                    keep = ~zero[j] if keep is None else keep & ~zero[j]
            if keep is not None:
                s = s[keep]
            hist[t] += np.bincount(s, minlength=width)[:width]
    return hist


def _block_partials(z, block):
    n = z.shape[0]
    nblocks = -(-n // block)
    pad = nblocks * block - n
    if pad:
        z = np.concatenate([z, np.zeros(pad, dtype=z.dtype)])
    return z.reshape(nblocks, block).sum(axis=1)


def complex_corr_blocks(values, starts, count, block=4096, threads=1):
    z = values[0][starts[0]:starts[0] + count].copy()
    for j in range(1, len(values)):
        z *= values[j][starts[j]:starts[j] + count]
    return _block_partials(z, block)


def joint_hist(digits, starts, radices, count, threads=1):
    size = int(np.prod(radices))
    hist = np.zeros(size, dtype=np.int64)
    for lo in range(0, count, _CHUNK):
        hi = min(count, lo + _CHUNK)
        code = np.zeros(hi - lo, dtype=np.int64)
        place = 1
        for d, s, r in zip(digits, starts, radices):
            code += place * d[s + lo:s + hi].astype(np.int64)
            place *= int(r)
        hist += np.bincount(code, minlength=size)
    return hist


def _window_moduli(values, start, lo, hi, N, t):
    # |sum_{n=1}^N v[start+i+n] e(n t)| for i in [lo, hi) via local prefix sums
    n_idx = np.arange(start + lo + 1, start + hi + N, dtype=np.int64)
    phase = np.exp(2j * np.pi * (((n_idx - start) * t) % 1.0))
    c = np.concatenate([[0.0], np.cumsum(values[n_idx] * phase)])
    i = np.arange(hi - lo)
    S = c[i + N] - c[i]
    return np.abs(S)


def window_abs_blocks(values, start, count, N, t, block=4096, threads=1, per_m=None):
    nblocks = -(-count // block)
    out = np.zeros(nblocks)
    for b in range(nblocks):
        lo, hi = b * block, min(count, (b + 1) * block)
        a = _window_moduli(values, start, lo, hi, N, t)
        if per_m is not None:
            per_m[lo:hi] = a
        out[b] = a.sum()
    return out


def fourier_max_blocks(values, start, count, N, K, block=4096, threads=1, per_m=None):
    nblocks = -(-count // block)
    out = np.zeros(nblocks)
    win = np.lib.stride_tricks.sliding_window_view
    for b in range(nblocks):
        lo, hi = b * block, min(count, (b + 1) * block)
        seg = values[start + lo + 1:start + hi + N]
        w = win(seg, N)[: hi - lo]
        # K * ifft gives sum_j x_j e(j k / K); the extra e(k/K) factor has modulus 1
        spec = np.fft.ifft(w, n=K, axis=1) * K
        a = np.abs(spec).max(axis=1)
        if per_m is not None:
            per_m[lo:hi] = a
        out[b] = a.sum()
    return out
