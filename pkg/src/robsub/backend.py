"""Kernel backend selection: numba-jitted hot loops with a pure-Python/numpy fallback.

The env var ROBSUB_BACKEND picks the backend:

    ROBSUB_BACKEND=numba   use @njit kernels (default when numba imports)
    ROBSUB_BACKEND=numpy   run the same kernel source uncompiled

Both backends execute identical source and consume no RNG state inside the
kernels (all randomness is pregenerated coin tables), so results are
bit-identical across backends. ``robsub.bench`` times one against the other.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("ROBSUB_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(f"ROBSUB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
if _requested == "numba" and not HAVE_NUMBA:
    raise RuntimeError("ROBSUB_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA if _requested == "" else _requested == "numba"


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def jit_kernel(fn):
    """Compile fn with numba on the numba backend; return it unchanged otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def compile_for_bench(fn):
    """Return (python_impl, numba_impl or None) for benchmarking both paths."""
    if HAVE_NUMBA:
        return fn, numba.njit(cache=True)(fn)
    return fn, None
