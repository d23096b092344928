"""Backend selection for the hot loops.

Set ``UNICELL_DISABLE_NUMBA=1`` to run the numpy/pure-Python path instead of
the numba-compiled kernels. The flag is read once, at import time.
"""
import os
import warnings

_DISABLED = os.environ.get("UNICELL_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False
    if not _DISABLED:
        warnings.warn("numba is not available; using the slow fallback path", RuntimeWarning)

BACKEND = "numba" if HAS_NUMBA else "numpy"


def njit(func):
    """``numba.njit(cache=True)`` when the numba backend is active, else identity."""
    if HAS_NUMBA:
        return numba.njit(cache=True)(func)
    return func
