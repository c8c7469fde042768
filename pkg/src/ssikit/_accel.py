"""Optional numba acceleration.

Set ``SSI_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. when
debugging or comparing both paths.  If numba is not importable the numpy
path is used automatically.
"""
import os

_disabled = os.environ.get("SSI_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("numba disabled by SSI_DISABLE_NUMBA")
    from numba import njit

    USING_NUMBA = True
except ImportError:
    USING_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
