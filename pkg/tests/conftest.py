"""Shared helpers for the test suite.

The decoder oracle enumerates bases directly: with H of full column
rank, a least-absolute-deviations optimum interpolates at least n rows,
so solving H_J x = y_J for every invertible n-row subset J and keeping
the cheapest fit is exact. Quadratic-in-subsets, fine at Tm <= 8.
"""

import itertools

import numpy as np


def lad_oracle(h, y, weights=None):
    """Exact minimum of sum_i w_i |y_i - (Hx)_i| by basis enumeration."""
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    m, n = h.shape
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    best = np.inf
    for rows in itertools.combinations(range(m), n):
        sub = h[list(rows)]
        if np.linalg.matrix_rank(sub) < n:
            continue
        x = np.linalg.solve(sub, y[list(rows)])
        obj = float(w @ np.abs(y - h @ x))
        best = min(best, obj)
    assert np.isfinite(best), "matrix had no invertible row basis"
    return best


def random_full_rank(m, n, rng):
    """Gaussian m x n matrix resampled until full column rank."""
    for _ in range(64):
        h = rng.standard_normal((m, n))
        if np.linalg.matrix_rank(h) == n:
            return h
    raise AssertionError("could not draw a full-rank matrix")
