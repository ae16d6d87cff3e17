"""O(N^2) pairwise kernels for the log interaction.

Every reduction runs per-i with a fixed ascending-j inner order, so results are
bit-identical for any thread count. The numba path parallelizes over rows only;
set LOGGAS_DISABLE_NUMBA=1 to force the pure-numpy fallback.
"""

from __future__ import annotations

import os

import numpy as np

_USE_NUMBA = os.environ.get("LOGGAS_DISABLE_NUMBA", "0") != "1"

if _USE_NUMBA:
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if _USE_NUMBA:

    @njit(parallel=True, cache=True)
    def _hilbert_sums(x):
        n = x.shape[0]
        out = np.empty(n)
        for i in prange(n):
            xi = x[i]
            s = 0.0
            for j in range(n):
                if j != i:
                    s += 1.0 / (xi - x[j])
            out[i] = s
        return out

    @njit(parallel=True, cache=True)
    def _log_gap_rows(x):
        n = x.shape[0]
        rows = np.zeros(n)
        for i in prange(n):
            xi = x[i]
            s = 0.0
            for j in range(i + 1, n):
                s += np.log(np.abs(x[j] - xi))
            rows[i] = s
        return rows

else:

    def _hilbert_sums(x):
        n = x.shape[0]
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, np.inf)
        return (1.0 / diff).sum(axis=1)

    def _log_gap_rows(x):
        n = x.shape[0]
        rows = np.zeros(n)
        for i in range(n - 1):
            rows[i] = np.sum(np.log(np.abs(x[i + 1 :] - x[i])))
        return rows


def hilbert_sums(positions: np.ndarray) -> np.ndarray:
    """sum_{j != i} 1/(x_i - x_j) for every i (no 1/N factor)."""
    return _hilbert_sums(np.ascontiguousarray(positions, dtype=np.float64))


def log_gap_sum(positions: np.ndarray) -> float:
    """sum_{i < j} log|x_i - x_j|."""
    rows = _log_gap_rows(np.ascontiguousarray(positions, dtype=np.float64))
    return float(np.sum(rows))


def set_threads(k: int | None) -> int:
    """Pin the kernel thread count; returns the count in effect."""
    if not _USE_NUMBA:
        return 1
    if k is None:
        k = numba.config.NUMBA_NUM_THREADS
    k = max(1, min(int(k), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(k)
    return k


def using_numba() -> bool:
    return _USE_NUMBA
