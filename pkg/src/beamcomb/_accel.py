"""JIT switch for the numeric kernels.

Kernels in :mod:`beamcomb._kernels` are written in the numpy subset numba
understands. When numba is importable and ``BEAMCOMB_DISABLE_JIT`` is unset
they are compiled with ``numba.njit``; otherwise the same functions run as
plain numpy/Python code.
"""
import os

_FLAG = os.environ.get("BEAMCOMB_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_ENABLED = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def kernel(fn):
    """Compile ``fn`` with numba when JIT is enabled, else return it unchanged."""
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def python_impl(fn):
    """Return the pure-numpy body of a (possibly jitted) kernel."""
    return getattr(fn, "py_func", fn)
