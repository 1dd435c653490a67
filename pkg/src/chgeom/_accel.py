"""JIT switch for the numeric kernels.

Set ``CHGEOM_PURE_NUMPY=1`` before import to run every kernel as plain
Python/numpy.  Both paths execute the same function bodies.
"""

import os

PURE_NUMPY = os.environ.get("CHGEOM_PURE_NUMPY", "0").lower() in ("1", "true", "yes")

try:
    if PURE_NUMPY:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    _njit = None


def jit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if func is None:
        return lambda f: jit(f, **kwargs)
    if not HAS_NUMBA:
        return func
    kwargs.setdefault("cache", True)
    return _njit(**kwargs)(func)


def backend():
    return "numba" if HAS_NUMBA else "numpy"
