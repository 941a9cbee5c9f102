"""Kernel dispatch: numba-jitted hot loops with a pure-Python twin.

Set ``BIRKHOFFLAB_DISABLE_JIT=1`` before import to run every kernel as
plain Python.  The fallback executes the *same source*: integer state is
carried as numpy uint64 scalars, whose wrapping arithmetic matches the
jitted code bit for bit (scalar overflow warnings are suppressed via
np.errstate).  ``python -m birkhofflab.bench`` times both paths and
checks they agree exactly.
"""

import os
from functools import wraps

import numpy as np

JIT_ENABLED = os.environ.get("BIRKHOFFLAB_DISABLE_JIT", "").lower() not in (
    "1",
    "true",
    "yes",
)

if JIT_ENABLED:
    from numba import njit as _numba_njit

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if func is None:
            return lambda f: _numba_njit(**kwargs)(f)
        return _numba_njit(**kwargs)(func)

else:

    def njit(func=None, **kwargs):
        def decorate(f):
            @wraps(f)
            def wrapper(*args):
                with np.errstate(over="ignore"):
                    return f(*args)

            wrapper.py_func = f
            return wrapper

        if func is None:
            return decorate
        return decorate(func)


def pure(kernel):
    """Pure-Python twin of a kernel, regardless of the global JIT flag."""
    f = getattr(kernel, "py_func", kernel)

    @wraps(f)
    def wrapper(*args):
        with np.errstate(over="ignore"):
            return f(*args)

    return wrapper
