"""Shared numerical helpers: index conventions, rank tests, seed derivation.

Channel/row index sets in the public API are 1-based (channels 1..m per
step, stacked rows 1..T*m). Conversion to 0-based numpy indexing happens
here and nowhere else.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

# Relative singular-value cutoff used for every rank decision in the package.
RANK_RTOL = 1e-8

_MASK64 = (1 << 64) - 1


def as_row_array(support: Iterable[int], width: int) -> np.ndarray:
    """Sorted 0-based row indices for a 1-based index set.

    Rejects indices outside 1..width and non-integer entries.
    """
    rows = sorted(set(int(i) for i in support))
    if rows and (rows[0] < 1 or rows[-1] > width):
        raise ValueError(f"support indices must lie in 1..{width}, got {rows}")
    return np.asarray(rows, dtype=np.int64) - 1


def complement_rows(rows: np.ndarray, width: int) -> np.ndarray:
    """0-based complement of a sorted 0-based row index array."""
    mask = np.ones(width, dtype=bool)
    mask[rows] = False
    return np.nonzero(mask)[0]


def singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values of a, descending; empty matrices give an empty array."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def has_full_column_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    a = np.asarray(a, dtype=float)
    n = a.shape[1]
    if n == 0:
        return True
    if a.shape[0] < n:
        return False
    s = singular_values(a)
    return bool(s[-1] > rtol * s[0]) if s[0] > 0 else False

def nullspace(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the nullspace of a.

    A matrix with no rows has the whole space as its nullspace.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[1]
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(a)
    if s.size and s[0] > 0:
        rank = int(np.sum(s > rtol * s[0]))
    else:
        rank = 0
    return vt[rank:].T


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(*components: int) -> int:
    """Mix integer components into a 64-bit seed.

    Used to give every (cell, trial, stream) its own generator so that any
    execution order or degree of parallelism reproduces identical results.
    """
    state = 0
    for c in components:
        state = _splitmix64((state ^ (int(c) & _MASK64)) & _MASK64)
    return state
