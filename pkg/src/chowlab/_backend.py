"""Kernel selection: compiled extension if importable, numpy otherwise."""
import os

from chowlab import _pure

if os.environ.get("CHOWLAB_PURE_PYTHON"):
    kernels = _pure
else:
    try:
        from chowlab import _core as kernels
    except ImportError:  # extension not built
        kernels = _pure

BACKEND = kernels.BACKEND


def compiled():
    """The compiled module, or None when it is unavailable."""
    try:
        from chowlab import _core
    except ImportError:
        return None
    return _core
