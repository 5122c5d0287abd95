"""Numba shim and backend selection.

The hot dual-ascent loop has two interchangeable implementations: a numba
@njit kernel and a vectorised pure-numpy fallback.  ``ROCSVM_BACKEND`` set to
``numpy`` or ``numba`` forces one; by default numba is used when importable.
Both paths perform the same floating-point operations in the same order, so
results do not depend on the choice.
"""

from __future__ import annotations

import os
import warnings

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def active_backend() -> str:
    """Resolve the solver backend, honouring the ROCSVM_BACKEND env flag."""
    choice = os.environ.get("ROCSVM_BACKEND", "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            warnings.warn("ROCSVM_BACKEND=numba requested but numba is unavailable; using numpy")
            return "numpy"
        return "numba"
    if choice:
        raise ValueError(f"ROCSVM_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    return "numba" if HAS_NUMBA else "numpy"
