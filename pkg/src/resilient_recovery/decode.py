"""Weighted least-absolute-deviation state decoding.

The decoder returns argmin over x of the (weighted) 1-norm of y - H x,
solved exactly as a linear program. Down-weighting a suspected channel
set makes the fit tolerate large corruption there while still penalizing
disagreement on trusted channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .model import ObservationWindow
from .util import as_row_array

# |x_hat - x| <= REL_TOL * max(|x|, NORM_FLOOR) counts as a recovery.
DEFAULT_REL_TOL = 1e-3
NORM_FLOOR = 1e-12
_OBJ_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class WeightVector:
    """Per-row positive weights: omega on the suspected rows, 1 elsewhere."""

    values: np.ndarray
    omega: float
    suspected: frozenset[int]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("weights must be a vector")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "suspected", frozenset(int(i) for i in self.suspected))

    @property
    def width(self) -> int:
        return self.values.shape[0]


def make_weights(suspected, omega: float, width: int) -> WeightVector:
    """Weight vector with omega on the 1-based suspected rows, 1 elsewhere."""
    if not (0 < omega <= 1):
        raise ValueError("omega must lie in (0, 1]")
    rows = as_row_array(suspected, width)
    values = np.ones(width)
    values[rows] = omega
    return WeightVector(values=values, omega=float(omega),
                        suspected=frozenset(int(r) + 1 for r in rows))


def weighted_l1_norm(v: np.ndarray, weights) -> float:
    """Sum of w_i |v_i|; weights may be a WeightVector or a plain vector."""
    values = weights.values if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != values.shape:
        raise ValueError("vector and weights must have matching length")
    return float(np.abs(v) @ values)


@dataclass(frozen=True)
class Estimate:
    x_hat: np.ndarray
    residual: np.ndarray
    objective: float


def _lad_fit(h: np.ndarray, y: np.ndarray, w: np.ndarray) -> Estimate:
    """Exact LP solve of min_x sum_i w_i |y_i - (H x)_i|.

    Residuals are split into nonnegative parts r+ and r-, giving equality
    rows H x + r+ - r- = y whose r columns seed the simplex with a
    feasible basis.
    """
    rows, n = h.shape
    eye = np.eye(rows)
    a = np.hstack([h, eye, -eye])
    c = np.concatenate([np.zeros(n), w, w])
    free = np.zeros(n + 2 * rows, dtype=bool)
    free[:n] = True
    problem = lp.LpProblem(c=c, a=a, b=y, senses=(lp.EQ,) * rows, free=free)
    sol = lp.solve_lp(problem)
    if sol.status != lp.OPTIMAL:
        raise lp.LpNumericalError(f"decoder LP ended with status {sol.status}")
    x_hat = sol.x[:n]
    residual = y - h @ x_hat
    objective = float(sol.objective)
    direct = float(np.abs(residual) @ w)
    if abs(objective - direct) > _OBJ_CHECK_TOL * (1.0 + abs(direct)):
        raise lp.LpNumericalError(
            f"decoder objective {objective!r} disagrees with residual norm {direct!r}")
    return Estimate(x_hat=x_hat, residual=residual, objective=direct)


def l1_decode(window: ObservationWindow) -> Estimate:
    """Unweighted least-absolute-deviation decode of a window."""
    return _lad_fit(window.h, window.y, np.ones(window.width))


def weighted_l1_decode(window: ObservationWindow, weights: WeightVector) -> Estimate:
    """Weighted decode; weights must cover every stacked row."""
    if weights.width != window.width:
        raise ValueError("weight vector must have one entry per stacked row")
    if np.any(weights.values <= 0):
        raise ValueError("weights must be strictly positive")
    return _lad_fit(window.h, window.y, weights.values)


def is_successful_recovery(x_hat: np.ndarray, x_true: np.ndarray,
                           rel_tol: float = DEFAULT_REL_TOL) -> bool:
    """Relative 2-norm error test with an absolute floor for tiny states."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    err = float(np.linalg.norm(x_hat - x_true))
    return err <= rel_tol * max(float(np.linalg.norm(x_true)), NORM_FLOOR)
