"""Backend toggle for the hot numeric kernels.

Kernels in :mod:`neurocobot.kernels` are plain Python functions over numpy
arrays, written loop-style so numba can compile them. ``maybe_jit`` wraps them
with ``numba.njit`` unless the ``NEUROCOBOT_BACKEND`` environment variable
selects the pure-numpy fallback:

    NEUROCOBOT_BACKEND=numba   force numba (ImportError if unavailable)
    NEUROCOBOT_BACKEND=numpy   run kernels as plain Python / numpy
    unset or "auto"            numba when importable, numpy otherwise

The choice is made once at import time. ``benchmarks/bench_kernels.py``
compares both paths.
"""

import os

ENV_VAR = "NEUROCOBOT_BACKEND"


def _resolve_backend() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from numba import njit as _njit

    def maybe_jit(fn):
        """Compile ``fn`` with numba (cached), or return it unchanged on the numpy path."""
        return _njit(cache=True, fastmath=False)(fn)

else:

    def maybe_jit(fn):
        """Compile ``fn`` with numba (cached), or return it unchanged on the numpy path."""
        return fn
