"""Deterministic reductions shared by the statistics modules."""
import math

import numpy as np

from chowlab.functions import unit_roots


def fsum_complex(z):
    """Correctly rounded sum of a complex array (real and imaginary parts separately)."""
    z = np.asarray(z, dtype=np.complex128)
    return complex(math.fsum(z.real), math.fsum(z.imag))


def phase_sum(hist, L):
    """sum_k hist[k] e(k/L) for a histogram folded mod L.

    ``hist`` may be longer than L; bins are folded first.  Orders 1 and 2
    are summed in integers.
    """
    hist = np.asarray(hist, dtype=np.int64)
    folded = np.zeros(L, dtype=np.int64)
    np.add.at(folded, np.arange(hist.shape[-1]) % L, hist)
    if L == 1:
        return complex(int(folded[0]))
    if L == 2:
        return complex(int(folded[0]) - int(folded[1]))
    roots = unit_roots(L)
    return complex(math.fsum(folded * roots.real), math.fsum(folded * roots.imag))
