"""Backend switch for the hot numeric kernels.

Every hot kernel exists twice: a numba ``@njit`` loop version and a vectorised
numpy version.  ``RDKERNEL_DISABLE_NUMBA=1`` in the environment (read once, at
import) selects the numpy versions everywhere.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("RDKERNEL_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no")


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    if func is None:
        return wrap
    return wrap(func)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
