"""Hot numeric kernels with two interchangeable backends.

The numba backend compiles explicit loops with ``@njit``; the numpy backend
expresses the same computations with vectorized array operations. Both return
identical results (bitwise for the integer/comparison-driven kernels, within
rounding for the floating-point reductions).

Select the backend with the ``FLUOROSPEC_BACKEND`` environment variable
(``numba`` or ``numpy``) before importing the package. ``numba`` is the
default when it is importable.
"""
import os

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba_impl = None
    HAVE_NUMBA = False

_requested = os.environ.get("FLUOROSPEC_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(
        f"FLUOROSPEC_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"
_impl = numba_impl if BACKEND == "numba" else numpy_impl

best_split = _impl.best_split
tree_apply = _impl.tree_apply
knn_predict = _impl.knn_predict
smo_solve = _impl.smo_solve
adam_update = _impl.adam_update


def get_backend(name):
    """Return the kernel namespace for ``name`` ('numba' or 'numpy')."""
    if name == "numpy":
        return numpy_impl
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        return numba_impl
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BACKEND", "HAVE_NUMBA", "get_backend",
    "best_split", "tree_apply", "knn_predict", "smo_solve", "adam_update",
]
