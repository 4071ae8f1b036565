"""Optional numba acceleration.

Hot kernels are written once in loop form and compiled with numba when it is
importable.  Setting ``MACFLOW_NUMBA=0`` (or running without numba) selects
the vectorized numpy implementations instead; both paths are kept importable
side by side so tests and benchmarks can compare them in one process.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None

_flag = os.environ.get("MACFLOW_NUMBA", "1").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "off", "no")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def decorator(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return decorator


def thread_count():
    """Worker cap from ``MACFLOW_THREADS`` (defaults to 1)."""
    raw = os.environ.get("MACFLOW_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MACFLOW_THREADS must be an integer, got {raw!r}")
    return max(1, n)
