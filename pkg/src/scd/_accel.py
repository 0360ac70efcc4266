"""Numba switch.

Kernels are written twice: a jitted loop version and a numpy fallback.
Set ``SCD_DISABLE_NUMBA=1`` to force the fallback (also used when numba
is not importable).
"""

import os
import warnings

_disabled = os.environ.get("SCD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

# TBB in this kind of environment is often too old and numba warns on every run
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _disabled

if not NUMBA_AVAILABLE and not _disabled:  # pragma: no cover
    warnings.warn("numba not importable, falling back to numpy kernels (slow)")


def njit(f=None, **options):
    """``numba.njit`` with caching, or identity when numba is unavailable."""
    options.setdefault("cache", True)

    def wrap(func):
        if numba is None:
            return func
        return numba.njit(**options)(func)

    if f is None:
        return wrap
    return wrap(f)


prange = range if numba is None else numba.prange


def set_num_threads(n: int) -> None:
    """Limit numba's worker pool. Results never depend on this."""
    if numba is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
