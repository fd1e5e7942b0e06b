"""Backend selection for the numeric kernels.

Numba is used when importable unless ``MICROPUMP_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel dispatches to its numpy twin.
"""

import os

_FLAG = os.environ.get("MICROPUMP_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in {"1", "true", "yes", "on"}


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba exists so the benchmark can compare
    both paths in one process; the env flag only controls dispatch.
    """
    if NUMBA_AVAILABLE:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
