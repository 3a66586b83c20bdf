"""Optional numba acceleration with a pure-numpy fallback.

The hot kernels are written as plain loops over numpy arrays so the same
source runs compiled or interpreted.  Set ``MCLINK_DISABLE_NUMBA=1`` to
force the interpreted path; both paths produce bit-identical results.
"""

from __future__ import annotations

import os

__all__ = ["HAS_NUMBA", "NUMBA_ENABLED", "njit"]

try:
    import numba as _numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    _numba = None
    HAS_NUMBA = False

NUMBA_ENABLED = HAS_NUMBA and os.environ.get("MCLINK_DISABLE_NUMBA", "") != "1"

if NUMBA_ENABLED:

    def njit(*args, **kwargs):
        return _numba.njit(*args, **kwargs)

else:

    def njit(*args, **kwargs):
        # decorator used both bare and with options
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
