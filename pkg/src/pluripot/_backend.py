"""Compute-backend selection.

Hot kernels (grid relaxation sweeps, simplex-projected gradient descent) exist
twice: a numba-jitted scalar-loop version and a vectorized pure-numpy version.
Which one runs is decided once at import time from the PLURIPOT_BACKEND
environment variable:

    auto   use numba when importable, else numpy   (default)
    numba  require numba, raise if missing
    numpy  force the pure-numpy path even if numba is installed

PLURIPOT_THREADS caps the worker count used for embarrassingly parallel
batches of independent solves (the numba kernels release the GIL).
"""

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

_choice = os.environ.get("PLURIPOT_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError("PLURIPOT_BACKEND must be one of auto|numba|numpy, got %r" % _choice)
if _choice == "numba" and not HAS_NUMBA:
    raise ImportError("PLURIPOT_BACKEND=numba but numba is not importable")

USE_NUMBA = HAS_NUMBA if _choice == "auto" else (_choice == "numba")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """numba.njit when the numba backend is active, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrapper(f):
        return f

    if args and callable(args[0]) and len(args) == 1 and not kwargs:
        return args[0]
    return wrapper


def thread_count():
    """Worker cap for batches of independent solves."""
    raw = os.environ.get("PLURIPOT_THREADS", "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise ValueError("PLURIPOT_THREADS must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)
