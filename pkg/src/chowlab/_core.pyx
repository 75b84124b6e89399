# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every function here has a numpy twin in ``_pure`` with the same signature
and the same output; ``_backend`` picks one at import time.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, threadid
from libc.stdint cimport uint8_t, uint16_t, int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, free
from libc.math cimport sqrt, cos, sin, M_PI, floor

cnp.import_array()

BACKEND = "compiled"


def sieve_segment(int64_t lo, int64_t hi, const int64_t[::1] primes):
    """omega, big_omega and squarefree flags for n in [lo, hi).

    ``primes`` must contain every prime <= isqrt(hi - 1).
    """
    cdef Py_ssize_t size = hi - lo
    omega_a = np.zeros(size, dtype=np.uint8)
    big_a = np.zeros(size, dtype=np.uint8)
    sqf_a = np.ones(size, dtype=np.uint8)
    prod_a = np.ones(size, dtype=np.int64)
    cdef uint8_t[::1] om = omega_a
    cdef uint8_t[::1] big = big_a
    cdef uint8_t[::1] sqf = sqf_a
    cdef int64_t[::1] prod = prod_a
    cdef Py_ssize_t k, i
    cdef int64_t p, pk, top = hi - 1
    cdef int level
    with nogil:
        for k in range(primes.shape[0]):
            p = primes[k]
            if p * p > top:
                break
            pk = p
            level = 1
            while True:
                i = ((lo + pk - 1) // pk) * pk - lo
                if level == 1:
                    while i < size:
                        om[i] += 1
                        big[i] += 1
                        prod[i] *= p
                        i += pk
                elif level == 2:
                    while i < size:
                        sqf[i] = 0
                        big[i] += 1
                        prod[i] *= p
                        i += pk
                else:
                    while i < size:
                        big[i] += 1
                        prod[i] *= p
                        i += pk
                if pk > top // p:
                    break
                pk *= p
                level += 1
        # leftover cofactor n / prod is 1 or a single prime > sqrt(hi)
        for i in range(size):
            if prod[i] != lo + i:
                om[i] += 1
                big[i] += 1
    return omega_a, big_a, sqf_a


def exact_corr_hist(list exps, list masks, const int64_t[::1] starts,
                    const int64_t[:, ::1] mults, const uint8_t[:, ::1] active,
                    Py_ssize_t width, Py_ssize_t count, int threads=1):
    """Phase histograms for products of root-of-unity valued sequences.

    Slot ``j`` reads ``exps[j][starts[j] + i]`` for ``i < count``.  For term
    ``t`` the phase index is ``sum_j mults[t, j] * e_j``; positions where an
    active slot is masked (value zero) are skipped.  Returns int64 array of
    shape (T, width).
    """
    cdef Py_ssize_t k = len(exps)
    cdef Py_ssize_t T = mults.shape[0]
    cdef int nthreads = max(1, threads)
    cdef const uint16_t** eptr = <const uint16_t**> malloc(k * sizeof(uint16_t*))
    cdef const uint8_t** mptr = <const uint8_t**> malloc(k * sizeof(uint8_t*))
    cdef uint64_t* actbits = <uint64_t*> malloc(T * sizeof(uint64_t))
    cdef const uint16_t[::1] ev
    cdef const uint8_t[::1] mv
    cdef bint any_mask = False
    cdef Py_ssize_t j, t
    cdef int64_t[:, :, ::1] hist_view
    try:
        for j in range(k):
            ev = exps[j]
            eptr[j] = &ev[starts[j]]
            if masks[j] is None:
                mptr[j] = NULL
            else:
                mv = masks[j]
                mptr[j] = &mv[starts[j]]
                any_mask = True
        for t in range(T):
            actbits[t] = 0
            for j in range(k):
                if active[t, j]:
                    actbits[t] |= (<uint64_t> 1) << j
        hist_a = np.zeros((nthreads, T, width), dtype=np.int64)
        hist_view = hist_a
        with nogil:
            _exact_loop(eptr, mptr, actbits, mults, hist_view, k, T, count, nthreads, any_mask)
    finally:
        free(eptr)
        free(mptr)
        free(actbits)
    return hist_a.sum(axis=0)


cdef void _exact_loop(const uint16_t** eptr, const uint8_t** mptr, uint64_t* actbits,
                      const int64_t[:, ::1] mults, int64_t[:, :, ::1] hist,
                      Py_ssize_t k, Py_ssize_t T, Py_ssize_t count, int nthreads,
                      bint any_mask) noexcept nogil:
    # chunked: per term build the phase index for a run of positions with
    # vectorizable loops, then bump four interleaved sub-histograms
    cdef Py_ssize_t chunk = 2048
    cdef Py_ssize_t nchunks = (count + chunk - 1) // chunk
    cdef Py_ssize_t width = hist.shape[2]
    cdef Py_ssize_t c, i, j, t, lo, n, r
    cdef int tid
    cdef int64_t mlt
    cdef int32_t* buf
    cdef int64_t* sub
    cdef const uint16_t* ep
    cdef const uint8_t* mp
    for c in prange(nchunks, num_threads=nthreads, schedule="static"):
        tid = threadid()
        lo = c * chunk
        n = chunk
        if lo + n > count:
            n = count - lo
        buf = <int32_t*> malloc(chunk * sizeof(int32_t))
        sub = <int64_t*> malloc(4 * (width + 1) * sizeof(int64_t))
        for t in range(T):
            for i in range(n):
                buf[i] = 0
            for j in range(k):
                mlt = mults[t, j]
                if mlt != 0:
                    ep = eptr[j] + lo
                    for i in range(n):
                        buf[i] = buf[i] + <int32_t> (mlt * ep[i])
            if any_mask:
                for j in range(k):
                    if mptr[j] != NULL and (actbits[t] >> j) & 1:
                        mp = mptr[j] + lo
                        for i in range(n):
                            if mp[i] != 0:
                                buf[i] = <int32_t> width
            for i in range(4 * (width + 1)):
                sub[i] = 0
            i = 0
            while i + 4 <= n:
                sub[buf[i]] += 1
                sub[(width + 1) + buf[i + 1]] += 1
                sub[2 * (width + 1) + buf[i + 2]] += 1
                sub[3 * (width + 1) + buf[i + 3]] += 1
                i = i + 4
            while i < n:
                sub[buf[i]] += 1
                i = i + 1
            for r in range(width):
                hist[tid, t, r] += sub[r] + sub[(width + 1) + r] + sub[2 * (width + 1) + r] \
                    + sub[3 * (width + 1) + r]
        free(buf)
        free(sub)


def complex_corr_blocks(list values, const int64_t[::1] starts, Py_ssize_t count,
                        Py_ssize_t block=4096, int threads=1):
    """Per-block compensated sums of prod_j values[j][starts[j] + i]."""
    cdef Py_ssize_t k = len(values)
    cdef Py_ssize_t nblocks = (count + block - 1) // block
    cdef const double complex** vptr = <const double complex**> malloc(k * sizeof(double complex*))
    cdef const double complex[::1] vv
    cdef Py_ssize_t j
    cdef int nthreads = max(1, threads)
    out_a = np.zeros(nblocks, dtype=np.complex128)
    cdef double complex[::1] out = out_a
    try:
        for j in range(k):
            vv = values[j]
            vptr[j] = &vv[starts[j]]
        with nogil:
            _complex_loop(vptr, out, k, count, block, nblocks, nthreads)
    finally:
        free(vptr)
    return out_a


cdef void _complex_loop(const double complex** vptr, double complex[::1] out,
                        Py_ssize_t k, Py_ssize_t count, Py_ssize_t block,
                        Py_ssize_t nblocks, int nthreads) noexcept nogil:
    cdef Py_ssize_t b, i, j, lo, hi
    cdef double complex z
    cdef double sr, si, cr, ci, y, tt
    for b in prange(nblocks, num_threads=nthreads, schedule="static"):
        lo = b * block
        hi = lo + block
        if hi > count:
            hi = count
        sr = 0.0
        si = 0.0
        cr = 0.0
        ci = 0.0
        for i in range(lo, hi):
            z = vptr[0][i]
            for j in range(1, k):
                z = z * vptr[j][i]
            y = z.real - cr
            tt = sr + y
            cr = (tt - sr) - y
            sr = tt
            y = z.imag - ci
            tt = si + y
            ci = (tt - si) - y
            si = tt
        out[b] = sr + 1j * si


def joint_hist(list digits, const int64_t[::1] starts, const int64_t[::1] radices,
               Py_ssize_t count, int threads=1):
    """Histogram of mixed-radix codes sum_j digits[j][starts[j] + i] * radix_j."""
    cdef Py_ssize_t k = len(digits)
    cdef Py_ssize_t size = 1
    cdef Py_ssize_t j
    cdef int nthreads = max(1, threads)
    cdef const uint8_t** dptr = <const uint8_t**> malloc(k * sizeof(uint8_t*))
    cdef int64_t* place = <int64_t*> malloc(k * sizeof(int64_t))
    cdef const uint8_t[::1] dv
    for j in range(k):
        place[j] = size
        size *= radices[j]
    hist_a = np.zeros((nthreads, size), dtype=np.int64)
    cdef int64_t[:, ::1] hist = hist_a
    try:
        for j in range(k):
            dv = digits[j]
            dptr[j] = &dv[starts[j]]
        with nogil:
            _joint_loop(dptr, place, hist, k, count, nthreads)
    finally:
        free(dptr)
        free(place)
    return hist_a.sum(axis=0)


cdef void _joint_loop(const uint8_t** dptr, int64_t* place, int64_t[:, ::1] hist,
                      Py_ssize_t k, Py_ssize_t count, int nthreads) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef int64_t code
    cdef int tid
    for i in prange(count, num_threads=nthreads, schedule="static"):
        tid = threadid()
        code = 0
        for j in range(k):
            code = code + dptr[j][i] * place[j]
        hist[tid, code] += 1


cdef inline double complex _unit(double x) noexcept nogil:
    # e(x) with x reduced mod 1 first
    x = x - floor(x)
    return cos(2.0 * M_PI * x) + 1j * sin(2.0 * M_PI * x)


def window_abs_blocks(const double complex[::1] values, Py_ssize_t start, Py_ssize_t count,
                      Py_ssize_t N, double t, Py_ssize_t block=4096, int threads=1,
                      per_m=None):
    """Per-block sums of |sum_{n=1}^N values[start + i + n] e(n t)| for i < count.

    The window sum slides by an exact recurrence and is recomputed from
    scratch at every block start.  If ``per_m`` is a float64 array of length
    ``count`` it receives the individual window moduli.
    """
    cdef Py_ssize_t nblocks = (count + block - 1) // block
    out_a = np.zeros(nblocks, dtype=np.float64)
    cdef double[::1] out = out_a
    twid_a = np.array([np.exp(2j * np.pi * ((n * t) % 1.0)) for n in range(N + 2)],
                      dtype=np.complex128)
    cdef double complex[::1] twid = twid_a
    cdef double[::1] pm
    cdef bint want = per_m is not None
    if want:
        pm = per_m
    else:
        pm = np.zeros(1, dtype=np.float64)
    cdef int nthreads = max(1, threads)
    with nogil:
        _window_loop(&values[start], twid, out, pm, want, count, N, block, nblocks, nthreads)
    return out_a


cdef void _window_loop(const double complex* v, double complex[::1] twid, double[::1] out,
                       double[::1] pm, bint want, Py_ssize_t count, Py_ssize_t N,
                       Py_ssize_t block, Py_ssize_t nblocks, int nthreads) noexcept nogil:
    cdef Py_ssize_t b, i, n, lo, hi
    cdef double complex S, winv, w1, wN1
    cdef double acc, comp, y, tt, a
    winv = twid[1].conjugate()
    w1 = twid[1]
    wN1 = twid[N + 1]
    for b in prange(nblocks, num_threads=nthreads, schedule="static"):
        lo = b * block
        hi = lo + block
        if hi > count:
            hi = count
        S = 0.0
        for n in range(1, N + 1):
            S = S + v[lo + n] * twid[n]
        acc = 0.0
        comp = 0.0
        for i in range(lo, hi):
            a = sqrt(S.real * S.real + S.imag * S.imag)
            if want:
                pm[i] = a
            y = a - comp
            tt = acc + y
            comp = (tt - acc) - y
            acc = tt
            if i + 1 < hi:
                S = winv * (S - v[i + 1] * w1 + v[i + N + 1] * wN1)
        out[b] = acc


def fourier_max_blocks(const double complex[::1] values, Py_ssize_t start, Py_ssize_t count,
                       Py_ssize_t N, Py_ssize_t K, Py_ssize_t block=4096, int threads=1,
                       per_m=None):
    """Per-block sums of max_k |sum_{n=1}^N values[start+i+n] e(n k / K)|.

    Sliding DFT over all K bins, reseeded directly at each block start.
    """
    cdef Py_ssize_t nblocks = (count + block - 1) // block
    out_a = np.zeros(nblocks, dtype=np.float64)
    cdef double[::1] out = out_a
    # twid[k, n] = e(n k / K) for n in 0..N+1
    kk = np.arange(K, dtype=np.int64)[:, None]
    nn = np.arange(N + 2, dtype=np.int64)[None, :]
    twid_a = np.exp(2j * np.pi * ((kk * nn) % K) / K).astype(np.complex128)
    cdef double complex[:, ::1] twid = twid_a
    cdef double[::1] pm
    cdef bint want = per_m is not None
    if want:
        pm = per_m
    else:
        pm = np.zeros(1, dtype=np.float64)
    cdef int nthreads = max(1, threads)
    with nogil:
        _fourier_loop(&values[start], twid, out, pm, want, count, N, K, block, nblocks,
                      nthreads)
    return out_a


cdef void _fourier_loop(const double complex* v, double complex[:, ::1] twid, double[::1] out,
                        double[::1] pm, bint want, Py_ssize_t count, Py_ssize_t N,
                        Py_ssize_t K, Py_ssize_t block, Py_ssize_t nblocks,
                        int nthreads) noexcept nogil:
    cdef Py_ssize_t b, i, n, q, lo, hi
    cdef double complex* S
    cdef double complex x0, xN, z
    cdef double acc, comp, y, tt, best, a
    for b in prange(nblocks, num_threads=nthreads, schedule="static"):
        lo = b * block
        hi = lo + block
        if hi > count:
            hi = count
        S = <double complex*> malloc(K * sizeof(double complex))
        for q in range(K):
            z = 0.0
            for n in range(1, N + 1):
                z = z + v[lo + n] * twid[q, n]
            S[q] = z
        acc = 0.0
        comp = 0.0
        for i in range(lo, hi):
            best = 0.0
            for q in range(K):
                a = S[q].real * S[q].real + S[q].imag * S[q].imag
                if a > best:
                    best = a
            best = sqrt(best)
            if want:
                pm[i] = best
            y = best - comp
            tt = acc + y
            comp = (tt - acc) - y
            acc = tt
            if i + 1 == hi:
                break
            x0 = v[i + 1]
            xN = v[i + N + 1]
            for q in range(K):
                S[q] = twid[q, 1].conjugate() * (S[q] - x0 * twid[q, 1] + xN * twid[q, N + 1])
        out[b] = acc
        free(S)
