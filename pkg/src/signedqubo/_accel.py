"""Numba toggle.

Set ``SIGNEDQUBO_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python/numpy. Results are identical either way because kernels never draw
random numbers themselves; callers pass pre-generated uniforms in.
"""

import os

_FLAG = os.environ.get("SIGNEDQUBO_DISABLE_NUMBA", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def python_impl(func):
    """Underlying Python function of a (possibly) jitted kernel."""
    return getattr(func, "py_func", func)
