"""Pure-numpy power-iteration kernel (fallback for the compiled one).

Same contract as ``_ckern.power_iteration`` but takes the cached float32
copy of the adjacency matrix and relies on BLAS for the row scans.
"""

from __future__ import annotations

import numpy as np


def power_iteration(af32, idx, shift, x0, max_iter, rtol):
    """Run power iteration for M = (A - shift)_{S x S}.

    Returns (rayleigh, vector, iterations, converged); the vector is a
    unit vector of length |S| in the order given by ``idx``.
    """
    n = af32.shape[0]
    m = idx.shape[0]
    x = np.array(x0, dtype=np.float64)
    xf = np.zeros(n, dtype=np.float32)
    lam = 0.0
    lam_prev = 0.0
    stall = 0
    converged = False
    it = 0
    while it < max_iter:
        s = x.sum()
        xf[idx] = x
        y = af32 @ xf
        y = y[idx].astype(np.float64)
        y -= shift * s
        lam = float(x @ y)
        it += 1
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            lam = 0.0
            converged = True
            break
        x = y / ny
        if it > 1 and abs(lam - lam_prev) <= rtol * (abs(lam) + 1e-30):
            stall += 1
            if stall >= 2:
                converged = True
                break
        else:
            stall = 0
        lam_prev = lam
    return lam, x, it, converged
