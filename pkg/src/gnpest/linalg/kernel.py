"""Kernel selection: compiled extension when available, numpy otherwise.

Set ``GNPEST_KERNEL`` to ``c``, ``py`` or ``auto`` (default) to force a
backend. Both backends implement the same power-iteration contract; they
may differ in float rounding but not in semantics.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykern

try:
    from . import _ckern

    _HAVE_C = True
except ImportError:
    _ckern = None
    _HAVE_C = False

__all__ = ["backend_name", "available_backends", "power_iteration"]


def available_backends():
    return ("c", "py") if _HAVE_C else ("py",)


def _select() -> str:
    choice = os.environ.get("GNPEST_KERNEL", "auto").lower()
    if choice == "c":
        if not _HAVE_C:
            raise RuntimeError("GNPEST_KERNEL=c but the compiled kernel is not built")
        return "c"
    if choice == "py":
        return "py"
    return "c" if _HAVE_C else "py"


_BACKEND = _select()


def backend_name() -> str:
    return _BACKEND


def power_iteration(adj, idx, shift, x0, max_iter, rtol, backend=None):
    """Dispatch to the selected backend.

    ``adj`` is an AdjacencyMatrix; ``idx`` the sorted int64 member array
    of the restriction set; ``x0`` a unit start vector of length
    ``len(idx)``. Returns (rayleigh, vector, iterations, converged).
    """
    name = backend or _BACKEND
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if name == "c":
        return _ckern.power_iteration(adj.mat, idx, shift, x0, max_iter, rtol)
    return _pykern.power_iteration(adj.float32(), idx, shift, x0, max_iter, rtol)
