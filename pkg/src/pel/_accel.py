"""Numba switch.

Set ``PEL_PURE_NUMPY=1`` to run every kernel through its numpy/Python
fallback instead of the compiled path.
"""

import os

_FLAG = os.environ.get("PEL_PURE_NUMPY", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it unchanged."""
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True)(fn)
