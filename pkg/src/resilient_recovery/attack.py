"""Stealthy worst-case attack synthesis against the unweighted decoder.

For an attacked row set T the designed corruption solves

    maximize |H_T x|_1   subject to   |H_{T^c} x|_1 <= eps

and injects e_T = H_T x on the attacked rows only. The optimal value is
sigma1(T) * eps where sigma1 is the worst-case gain of T; sigma1 > 1
makes the attack both effective (the decoded state provably moves) and
stealthy (the decode residual stays within eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import DEFAULT_EXACT_SUPPORT, SupportRatio, _support_gain
from .decode import l1_decode
from .model import ObservationWindow
from .util import RANK_RTOL, as_row_array, complement_rows, nullspace, singular_values


class AttackDesignError(ValueError):
    """Design preconditions failed; carries a nullspace witness if one exists."""

    def __init__(self, message: str, witness: np.ndarray | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class AttackDesign:
    support: frozenset[int]
    x_e: np.ndarray
    e: np.ndarray
    sigma1: float
    eps: float
    alpha_max: float | None
    exact: bool


@dataclass(frozen=True)
class SuccessVerdict:
    effective: bool
    stealthy: bool
    x_hat: np.ndarray
    shift: float
    residual_norm: float


def sigma1_detail(h: np.ndarray, support, *,
                  exact_limit: int = DEFAULT_EXACT_SUPPORT) -> SupportRatio:
    """Exact worst-case gain of the attacked set with direction and flags.

    Exactness enumerates 2^(|T|-1) sign patterns, so |T| is capped at
    exact_limit; larger sets must go through design_attack's heuristic.
    The value is math.inf when some column-space vector vanishes off the
    attacked set; a complement rank deficiency invisible to the set
    leaves the gain finite and sets the quotient flag.
    """
    h = np.asarray(h, dtype=float)
    width = h.shape[0]
    rows = as_row_array(support, width)
    if rows.size == 0 or rows.size == width:
        raise ValueError("attacked set must be a nonempty strict subset of the rows")
    if rows.size > exact_limit:
        raise ValueError(f"support larger than {exact_limit} rows; exact gain unavailable")
    return _support_gain(h, rows, exact=True)


def sigma1(h: np.ndarray, support, *, exact_limit: int = DEFAULT_EXACT_SUPPORT) -> float:
    """Exact worst-case gain of the attacked set (math.inf when unbounded)."""
    return float(sigma1_detail(h, support, exact_limit=exact_limit).value)


def design_attack(h: np.ndarray, support, eps: float, *,
                  exact_limit: int = DEFAULT_EXACT_SUPPORT, starts: int = 3,
                  ascent_iters: int = 16, rng=None) -> AttackDesign:
    """Worst-case sparse corruption of the attacked rows within budget eps.

    Requires full column rank off the attacked set (otherwise the gain is
    unbounded or only defined on a quotient; see nullspace_attack for the
    unbounded regime). Sets of at most exact_limit rows are solved by
    exact sign-pattern enumeration; larger ones by a deterministic ascent
    (generalized-eigen start, then sign iterations), flagged exact=False.
    """
    h = np.asarray(h, dtype=float)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    width = h.shape[0]
    rows = as_row_array(support, width)
    if rows.size == 0 or rows.size == width:
        raise ValueError("attacked set must be a nonempty strict subset of the rows")
    comp = complement_rows(rows, width)
    ns = nullspace(h[comp])
    if ns.shape[1] > 0:
        witness = ns[:, 0]
        raise AttackDesignError(
            "rows off the attacked set lose column rank; gain is unbounded or "
            f"quotient-only (nullspace witness {np.array2string(witness, precision=4)})",
            witness=witness)
    exact = rows.size <= exact_limit
    ratio = _support_gain(h, rows, exact=exact, starts=starts,
                          ascent_iters=ascent_iters, rng=rng)
    if math.isinf(ratio.value):
        raise AttackDesignError("gain is unbounded despite full complement rank",
                                witness=ratio.direction)
    x_e = eps * ratio.direction
    e = np.zeros(width)
    e[rows] = h[rows] @ x_e
    alpha = alpha_bound(h, support, eps, sigma1_value=float(ratio.value))
    return AttackDesign(support=frozenset(int(r) + 1 for r in rows), x_e=x_e, e=e,
                        sigma1=float(ratio.value), eps=float(eps),
                        alpha_max=alpha, exact=exact)


def nullspace_attack(h: np.ndarray, support, *, scale: float = 1.0):
    """Consistent-data attack for the unbounded regime.

    When the rows off the attacked set lose column rank, any nullspace
    direction v visible to the attacked rows gives e = H_T v with
    H x0 + e = H (x0 + v) off the set, shifting every decoder by v at
    zero residual. Returns (v, e) with |v| = scale, or None when no
    visible direction exists.
    """
    h = np.asarray(h, dtype=float)
    width = h.shape[0]
    rows = as_row_array(support, width)
    if rows.size == 0:
        raise ValueError("attacked set must be nonempty")
    comp = complement_rows(rows, width)
    ns = nullspace(h[comp])
    if ns.shape[1] == 0:
        return None
    gains = np.linalg.norm(h[rows] @ ns, axis=0)
    best = int(np.argmax(gains))
    smax = singular_values(h)[0] if h.size else 0.0
    if gains[best] <= RANK_RTOL * max(float(smax), 1.0):
        return None
    v = ns[:, best]
    anchor = int(np.argmax(np.abs(v)))
    if v[anchor] < 0:
        v = -v
    v = v * scale
    e = np.zeros(width)
    e[rows] = h[rows] @ v
    return v, e


def alpha_bound(h: np.ndarray, support, eps: float, *,
                sigma1_value: float | None = None,
                exact_limit: int = DEFAULT_EXACT_SUPPORT) -> float | None:
    """Guaranteed decoder shift (sigma1-1)*eps / (sqrt(|T|)*smax_T - smin_Tc).

    Returns None instead of raising when no guarantee holds: gain not
    finite and above 1, or attacked set too small against the spectra
    (the denominator must be positive).
    """
    h = np.asarray(h, dtype=float)
    rows = as_row_array(support, h.shape[0])
    if rows.size == 0:
        raise ValueError("attacked set must be nonempty")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if sigma1_value is None:
        sigma1_value = sigma1(h, support, exact_limit=exact_limit)
    if not math.isfinite(sigma1_value) or sigma1_value <= 1:
        return None
    comp = complement_rows(rows, h.shape[0])
    s_att = singular_values(h[rows])
    s_comp = singular_values(h[comp])
    if s_att.size == 0 or s_comp.size == 0 or s_comp[0] == 0:
        return None
    nonzero = s_comp[s_comp > RANK_RTOL * s_comp[0]]
    if nonzero.size == 0:
        return None
    denom = math.sqrt(rows.size) * float(s_att[0]) - float(nonzero[-1])
    if denom <= 0:
        return None
    return (sigma1_value - 1.0) * eps / denom


def verify_success(window: ObservationWindow, x_star: np.ndarray, eps: float,
                   alpha: float) -> SuccessVerdict:
    """Decode the attacked window and judge effectiveness and stealth.

    Effective: the estimate moved at least alpha away from the reference
    decode x_star. Stealthy: the decode residual 2-norm stays within eps.
    Comparisons carry a 1e-9 relative slack.
    """
    est = l1_decode(window)
    shift = float(np.linalg.norm(np.asarray(x_star, dtype=float) - est.x_hat))
    residual_norm = float(np.linalg.norm(est.residual))
    effective = shift >= alpha * (1.0 - 1e-9) - 1e-12
    stealthy = residual_norm <= eps * (1.0 + 1e-9) + 1e-12
    return SuccessVerdict(effective=effective, stealthy=stealthy, x_hat=est.x_hat,
                          shift=shift, residual_norm=residual_norm)
