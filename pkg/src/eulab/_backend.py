"""Kernel backend selection.

Hot loops exist twice: a numba ``@njit`` version working one seed at a time
and a vectorised pure-numpy version working on whole seed batches.  The
environment variable ``EULAB_NUMBA`` picks the default (``1``/unset: numba
when importable, ``0``: numpy).  Every dispatcher in :mod:`eulab.kernels`
also takes an explicit ``backend=`` argument so both paths can be compared.
"""
import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

NUMBA = "numba"
NUMPY = "numpy"


def _env_default():
    flag = os.environ.get("EULAB_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off") or not HAS_NUMBA:
        return NUMPY
    return NUMBA


DEFAULT_BACKEND = _env_default()


def resolve(backend=None):
    """Return a concrete backend name, honouring the env default."""
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in (NUMBA, NUMPY):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == NUMBA and not HAS_NUMBA:
        return NUMPY
    return backend


if HAS_NUMBA:
    def njit(fn):
        return numba.njit(cache=True, nogil=True)(fn)
else:  # pragma: no cover
    def njit(fn):
        return fn
