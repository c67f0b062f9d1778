"""Numba switch for the hot numeric kernels.

Set ``FOCKFISHER_DISABLE_NUMBA=1`` (or run without numba installed) to use the
pure-numpy paths. The flag is read once, at import time.
"""
import os

_flag = os.environ.get("FOCKFISHER_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _flag not in ("1", "true", "yes", "on")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = NUMBA_REQUESTED and HAVE_NUMBA

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "error_model": "numpy",
}


def njit(func):
    """Compile ``func`` with numba when available, else return it untouched.

    The compiled object is created even when the numpy path is selected, so
    tests and the benchmark can compare the two.
    """
    if not HAVE_NUMBA:
        return func
    return _numba.njit(**numba_default)(func)
