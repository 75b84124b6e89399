"""Numerical laboratory for correlations of bounded multiplicative functions."""
__version__ = "0.1.0"

from chowlab._backend import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
