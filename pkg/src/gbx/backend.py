"""Kernel backend selection.

Hot inner loops (expression-program evaluation, bilinear grid lookup,
loop angle unwrapping) exist twice: a numba @njit version and a pure
numpy version. The active backend is chosen once at import time:

  GBX_BACKEND=numba   use the JIT kernels (default when numba imports)
  GBX_BACKEND=numpy   force the pure-numpy fallback

Anything else raises. Compiled kernels are cached on disk, so only the
first process ever pays the compile cost.
"""

import os

try:
    import numba  # noqa: F401  (probe only; kernels import njit themselves)

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

_requested = os.environ.get("GBX_BACKEND", "").strip().lower()

if _requested == "":
    ACTIVE = "numba" if HAS_NUMBA else "numpy"
elif _requested in ("numba", "numpy"):
    if _requested == "numba" and not HAS_NUMBA:
        raise RuntimeError("GBX_BACKEND=numba requested but numba is not importable")
    ACTIVE = _requested
else:
    raise RuntimeError(f"GBX_BACKEND must be 'numba' or 'numpy', got {_requested!r}")


def max_threads() -> int:
    """Parallelism cap from GBX_THREADS (default 1, minimum 1)."""
    raw = os.environ.get("GBX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
