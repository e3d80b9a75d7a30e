"""Backend selection for the refinement kernels.

The compiled extension is used when it imports; otherwise, or when the
``DIMARKET_PURE_PYTHON`` environment variable is set to a non-empty value other
than ``0``, the pure-Python implementation is used.  Both produce identical
results.
"""
import os

from . import _pykernel

BACKENDS = {"python": _pykernel}

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None
else:
    BACKENDS["cython"] = _ckernel

if os.environ.get("DIMARKET_PURE_PYTHON", "") not in ("", "0") or _ckernel is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def make_context(n, weights, gvals, backend=None):
    """Build a kernel context; ``backend`` overrides the import-time choice."""
    module = BACKENDS[backend or BACKEND]
    return module.Context(n, weights, gvals)
