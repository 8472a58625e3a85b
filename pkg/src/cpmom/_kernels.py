"""Numerical hot loops with an optional compiled backend.

The only numerically heavy inner loop of the sampling pipeline is the
theta-average of |P(theta)|^{2 beta} over a trapezoid grid for every sampled
spectrum.  Both a compiled (numba) and a plain numpy implementation are
provided; selection order is

  1. ``CPMOM_BACKEND=numpy`` or ``CPMOM_BACKEND=numba`` in the environment,
  2. otherwise numba when importable, numpy when not.

Requesting numba without it installed raises at import time.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAS_NUMBA = False

_requested = os.environ.get("CPMOM_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "numba"):
    raise RuntimeError("CPMOM_BACKEND must be 'numpy' or 'numba'")
if _requested == "numba" and not _HAS_NUMBA:
    raise RuntimeError("CPMOM_BACKEND=numba requested but numba is not installed")

USE_NUMBA = _requested == "numba" or (_requested == "" and _HAS_NUMBA)
BACKEND = "numba" if USE_NUMBA else "numpy"


def inner_moments_numpy(phis: np.ndarray, beta: int, grid_size: int) -> np.ndarray:
    """Trapezoid theta-average of |P|^{2 beta} for each row of ``phis``.

    ``phis`` has shape (S, N); the result has shape (S,).  The uniform rule
    on [0, 2 pi) is exact because the integrand is a trigonometric polynomial
    of degree 2 N beta in theta.
    """
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    out = np.empty(phis.shape[0])
    # chunk the sample axis to bound the (chunk, N, M) temporary
    chunk = max(1, int(4e6 / (phis.shape[1] * grid_size)))
    for lo in range(0, phis.shape[0], chunk):
        p = phis[lo : lo + chunk, :, None]
        ab2 = (2.0 - 2.0 * np.cos(p - theta)) * (2.0 - 2.0 * np.cos(p + theta))
        vals = np.prod(ab2, axis=1) ** beta
        out[lo : lo + chunk] = np.mean(vals, axis=1)
    return out


if _HAS_NUMBA:

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _inner_moments_numba(phis, beta, grid_size):  # pragma: no cover
        S, N = phis.shape
        out = np.empty(S)
        for s in numba.prange(S):
            acc = 0.0
            for g in range(grid_size):
                theta = 2.0 * np.pi * g / grid_size
                val = 1.0
                for j in range(N):
                    val *= (2.0 - 2.0 * math.cos(phis[s, j] - theta)) * (
                        2.0 - 2.0 * math.cos(phis[s, j] + theta)
                    )
                acc += val ** beta
            out[s] = acc / grid_size
        return out

    def inner_moments_numba(phis, beta, grid_size):
        phis = np.ascontiguousarray(np.atleast_2d(np.asarray(phis, dtype=float)))
        return _inner_moments_numba(phis, int(beta), int(grid_size))

else:
    inner_moments_numba = None


def inner_moments(phis: np.ndarray, beta: int, grid_size: int) -> np.ndarray:
    if USE_NUMBA:
        return inner_moments_numba(phis, beta, grid_size)
    return inner_moments_numpy(phis, beta, grid_size)
