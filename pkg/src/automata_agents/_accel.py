"""Selects between numba-compiled kernels and their pure-numpy twins.

Set ``AUTOMATA_AGENTS_PURE_NUMPY=1`` to force the numpy path (useful for
debugging and on platforms without numba). The choice is read once at import.
"""

from __future__ import annotations

import os

_FLAG = "AUTOMATA_AGENTS_PURE_NUMPY"


def _env_wants_numpy() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _env_wants_numpy()


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
