"""Vectorized bisection for elementwise increasing functions."""

from __future__ import annotations

import numpy as np

from .errors import SolverError

MAX_ITER = 200


def bisect_increasing(g, lo, hi, tol: float, max_iter: int = MAX_ITER):
    """Root of an elementwise increasing ``g`` with ``g(lo) <= 0 < g(hi)``.

    Stops once every bracket is narrower than ``tol``; returns ``(root, iterations)``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for it in range(max_iter + 1):
        if np.max(hi - lo) <= tol:
            return 0.5 * (lo + hi), it
        mid = 0.5 * (lo + hi)
        up = g(mid) > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    raise SolverError(
        f"bisection did not reach tolerance {tol:g} in {max_iter} iterations "
        f"(widest bracket {float(np.max(hi - lo))!r})"
    )
