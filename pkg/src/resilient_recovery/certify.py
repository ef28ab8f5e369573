"""Recovery certificates for a stacked observation matrix.

Three kinds of guarantees are computed:

* column-space gain: beta = max over row sets S of at most a given size
  of the worst ratio |h_S|_1 / |h_{S^c}|_1 over the column space of H.
  beta < 1 certifies exact decoding under attacks confined to any such S.
* row restricted isometry: the smallest delta with
  (1-delta)|x|^2 <= |H_T x|^2 <= (1+delta)|x|^2 over row sets T.
* uniqueness: every deletion of 2*T*k rows keeps full column rank.

Exact computations enumerate row sets (and, for beta, sign patterns of
H_S x, one small LP each). Past the documented budgets a seeded
randomized scan returns a lower bound flagged exact=False; verdicts that
carry a witness remain independently checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from . import lp
from .util import RANK_RTOL, as_row_array, complement_rows, nullspace, singular_values

# Largest stacked width for which full support enumeration is attempted.
DEFAULT_EXACT_LIMIT = 18
# Cap on enumerated row sets (and sampled deletions past it).
DEFAULT_SUPPORT_BUDGET = 10 ** 6
# Largest |S| for which the 2^(|S|-1) sign-pattern LPs are enumerated.
DEFAULT_EXACT_SUPPORT = 16
# Witnesses must reproduce their certified value this tightly.
WITNESS_RTOL = 1e-8


@dataclass(frozen=True)
class SupportRatio:
    """Worst-case 1-norm gain of a row set against its complement.

    value may be math.inf, in which case direction spans column-space
    vectors vanishing on the complement. quotient flags a complement
    rank deficiency that is invisible to the set itself (the ratio is
    then finite on the quotient).
    """

    value: float
    direction: np.ndarray | None
    quotient: bool = False


@dataclass(frozen=True)
class CspCertificate:
    order: int
    beta: float
    witness_support: frozenset[int] | None
    witness_direction: np.ndarray | None
    exact: bool


@dataclass(frozen=True)
class RipCertificate:
    order: int
    delta: float
    mode: str
    witness_support: frozenset[int] | None
    exact: bool


@dataclass(frozen=True)
class UniquenessCertificate:
    order: int
    horizon: int
    deletion_size: int
    unique: bool
    witness: frozenset[int] | None
    exhaustive: bool


@dataclass(frozen=True)
class BoundReport:
    kind: str
    value: float
    condition_ok: bool
    inputs: dict


@dataclass(frozen=True)
class SurfaceCell:
    omega: float
    ppv: float
    kappa: float
    mu2: float
    bound: float
    delta_upper: float


def _canonical_direction(v: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(v))
    if nrm > 0:
        v = v / nrm
    anchor = int(np.argmax(np.abs(v)))
    return v if v[anchor] >= 0 else -v


def _pattern_lp(h_s: np.ndarray, h_c: np.ndarray, sgn: np.ndarray):
    """max sgn . (H_S x) subject to |H_{S^c} x|_1 <= 1, via an (x, u) lift.

    Returns (value, x) or (math.inf, None) when genuinely unbounded.
    """
    mc, n = h_c.shape
    a = np.zeros((2 * mc + 1, n + mc))
    a[:mc, :n] = h_c
    a[:mc, n:] = -np.eye(mc)
    a[mc:2 * mc, :n] = -h_c
    a[mc:2 * mc, n:] = -np.eye(mc)
    a[2 * mc, n:] = 1.0
    b = np.zeros(2 * mc + 1)
    b[2 * mc] = 1.0
    c = np.concatenate([-(h_s.T @ sgn), np.zeros(mc)])
    free = np.zeros(n + mc, dtype=bool)
    free[:n] = True
    sol = lp.solve_lp(lp.LpProblem(c=c, a=a, b=b, senses=(lp.LE,) * (2 * mc + 1), free=free))
    if sol.status == lp.UNBOUNDED:
        return math.inf, None
    if sol.status != lp.OPTIMAL:
        raise lp.LpNumericalError(f"sign-pattern LP ended with status {sol.status}")
    return -float(sol.objective), sol.x[:n].copy()


def _sign_patterns(size: int):
    """Deterministic enumeration of {+-1}^size with the first entry +1."""
    for g in range(1 << max(size - 1, 0)):
        sgn = np.ones(size)
        for b in range(size - 1):
            if (g >> b) & 1:
                sgn[b + 1] = -1.0
        yield sgn


def _eigen_start(h_s: np.ndarray, h_c: np.ndarray) -> np.ndarray | None:
    """Top generalized eigenvector of (H_S'H_S, H_{S^c}'H_{S^c})."""
    n = h_s.shape[1]
    g_s = h_s.T @ h_s
    g_c = h_c.T @ h_c
    ridge = 1e-12 * (1.0 + float(np.trace(g_c)))
    try:
        _, vecs = scipy.linalg.eigh(g_s, g_c + ridge * np.eye(n),
                                    subset_by_index=[n - 1, n - 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        return None
    return vecs[:, 0]


def _support_gain(h: np.ndarray, rows: np.ndarray, *, exact: bool,
                  starts: int = 3, ascent_iters: int = 16, rng=None) -> SupportRatio:
    """Worst-case gain of the 0-based row set; exact or ascent lower bound."""
    width = h.shape[0]
    comp = complement_rows(rows, width)
    h_s = h[rows]
    h_c = h[comp]
    scale = float(singular_values(h)[0]) if h.size else 0.0

    ns = nullspace(h_c)
    quotient = False
    if ns.shape[1] > 0:
        gains = np.linalg.norm(h_s @ ns, axis=0)
        best = int(np.argmax(gains))
        if gains[best] > RANK_RTOL * max(scale, 1.0):
            return SupportRatio(math.inf, _canonical_direction(ns[:, best]), False)
        quotient = True

    best_value = 0.0
    best_x: np.ndarray | None = None
    if exact:
        for sgn in _sign_patterns(rows.size):
            value, x = _pattern_lp(h_s, h_c, sgn)
            if math.isinf(value):
                return SupportRatio(math.inf, None, quotient)
            if value > best_value:
                best_value, best_x = value, x
    else:
        seeds = []
        start = _eigen_start(h_s, h_c)
        if start is not None:
            seeds.append(start)
        if rng is not None:
            for _ in range(max(starts - 1, 0)):
                seeds.append(rng.standard_normal(h.shape[1]))
        if not seeds:
            seeds.append(np.ones(h.shape[1]))
        for x in seeds:
            hx = h_s @ x
            sgn = np.where(hx >= 0, 1.0, -1.0)
            for _ in range(ascent_iters):
                value, x_new = _pattern_lp(h_s, h_c, sgn)
                if x_new is None:
                    return SupportRatio(math.inf, None, quotient)
                if value > best_value:
                    best_value, best_x = value, x_new
                sgn_new = np.where(h_s @ x_new >= 0, 1.0, -1.0)
                if np.array_equal(sgn_new, sgn):
                    break
                sgn = sgn_new
    if best_x is None:
        best_x = np.zeros(h.shape[1])
    return SupportRatio(best_value, best_x, quotient)


def l1_support_ratio(h: np.ndarray, support) -> SupportRatio:
    """Exact worst-case gain of a 1-based row set (shared certificate engine)."""
    h = np.asarray(h, dtype=float)
    rows = as_row_array(support, h.shape[0])
    if rows.size == 0:
        raise ValueError("support must be nonempty")
    return _support_gain(h, rows, exact=True)


def csp_beta(h: np.ndarray, order: int, *, exact_limit: int = DEFAULT_EXACT_LIMIT,
             support_budget: int = DEFAULT_SUPPORT_BUDGET, samples: int = 200,
             starts: int = 3, ascent_iters: int = 16, rng=None) -> CspCertificate:
    """Column-space gain certificate of the given order.

    Sets of exactly `order` rows dominate smaller ones (growing S raises
    the numerator and shrinks the complement), so only those are scanned.
    Exact when the width and the number of row sets fit the budgets;
    otherwise a seeded randomized lower bound flagged exact=False
    (rng=None uses a fixed seed).
    """
    h = np.asarray(h, dtype=float)
    width = h.shape[0]
    if not 1 <= order < width:
        raise ValueError("order must lie in 1..width-1")
    exact = width <= exact_limit and math.comb(width, order) <= support_budget
    best = SupportRatio(-1.0, None)
    best_rows: np.ndarray | None = None
    if exact:
        for combo in combinations(range(width), order):
            rows = np.asarray(combo, dtype=np.int64)
            ratio = _support_gain(h, rows, exact=True)
            if ratio.value > best.value:
                best, best_rows = ratio, rows
            if math.isinf(ratio.value):
                break
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        for _ in range(samples):
            rows = np.sort(rng.choice(width, size=order, replace=False)).astype(np.int64)
            ratio = _support_gain(h, rows, exact=False, starts=starts,
                                  ascent_iters=ascent_iters, rng=rng)
            if ratio.value > best.value:
                best, best_rows = ratio, rows
            if math.isinf(ratio.value):
                break
    witness = frozenset(int(r) + 1 for r in best_rows) if best_rows is not None else None
    return CspCertificate(order=order, beta=float(best.value), witness_support=witness,
                          witness_direction=best.direction, exact=exact)


def rip_delta(h: np.ndarray, order: int, *, mode: str = "effective",
              support_budget: int = DEFAULT_SUPPORT_BUDGET, samples: int = 2000,
              rng=None) -> RipCertificate:
    """Row restricted-isometry constant over row sets of the given order.

    mode "effective" scans sets of exactly `order` rows; "strict" scans
    every size up to it (any set smaller than the column count forces
    delta >= 1, which is why effective is the default).
    """
    h = np.asarray(h, dtype=float)
    width, n = h.shape
    if not 1 <= order <= width:
        raise ValueError("order must lie in 1..width")
    if mode not in ("effective", "strict"):
        raise ValueError("mode must be 'effective' or 'strict'")
    sizes = [order] if mode == "effective" else list(range(1, order + 1))
    total = sum(math.comb(width, s) for s in sizes)
    exact = total <= support_budget

    def delta_of(rows: np.ndarray) -> float:
        s = singular_values(h[rows])
        smax = float(s[0]) if s.size else 0.0
        smin = float(s[-1]) if rows.size >= n and s.size == n else 0.0
        return max(smax * smax - 1.0, 1.0 - smin * smin)

    best = -math.inf
    best_rows: np.ndarray | None = None
    if exact:
        for size in sizes:
            for combo in combinations(range(width), size):
                rows = np.asarray(combo, dtype=np.int64)
                d = delta_of(rows)
                if d > best:
                    best, best_rows = d, rows
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        for i in range(samples):
            size = sizes[i % len(sizes)]
            rows = np.sort(rng.choice(width, size=size, replace=False)).astype(np.int64)
            d = delta_of(rows)
            if d > best:
                best, best_rows = d, rows
    witness = frozenset(int(r) + 1 for r in best_rows) if best_rows is not None else None
    return RipCertificate(order=order, delta=float(best), mode=mode,
                          witness_support=witness, exact=exact)


def check_uniqueness(h: np.ndarray, k: int, t_horizon: int, *,
                     deletion_budget: int = DEFAULT_SUPPORT_BUDGET,
                     samples: int = 2000, rng=None) -> UniquenessCertificate:
    """Does every deletion of 2*T*k rows keep full column rank?

    Equivalent to: no nonzero column-space vector is supported on 2*T*k
    rows or fewer. A False verdict always carries a checkable witness
    (the deleted row set); a True verdict is only a proof when
    exhaustive=True.
    """
    h = np.asarray(h, dtype=float)
    width = h.shape[0]
    if k < 1 or t_horizon < 1:
        raise ValueError("sparsity and horizon must be positive")
    d = 2 * t_horizon * k
    if d >= width:
        # Deleting everything (or more) always kills the rank: more than
        # half the rows are attackable, so recovery cannot be unique.
        witness = frozenset(range(1, width + 1))
        return UniquenessCertificate(k, t_horizon, d, False, witness, True)

    def deficient(combo) -> bool:
        keep = np.ones(width, dtype=bool)
        keep[list(combo)] = False
        sub = h[keep]
        s = singular_values(sub)
        if s.size < h.shape[1] or s[0] == 0:
            return True
        return not s[-1] > RANK_RTOL * s[0]

    exhaustive = math.comb(width, d) <= deletion_budget
    if exhaustive:
        for combo in combinations(range(width), d):
            if deficient(combo):
                witness = frozenset(i + 1 for i in combo)
                return UniquenessCertificate(k, t_horizon, d, False, witness, True)
        return UniquenessCertificate(k, t_horizon, d, True, None, True)
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(samples):
        combo = np.sort(rng.choice(width, size=d, replace=False))
        if deficient(combo):
            witness = frozenset(int(i) + 1 for i in combo)
            return UniquenessCertificate(k, t_horizon, d, False, witness, False)
    return UniquenessCertificate(k, t_horizon, d, True, None, False)


def lemma_csp_from_rip(delta_k: float, delta_ak: float, a: float) -> float | None:
    """Column-space gain implied by two isometry constants, if any.

    Requires delta_k + a * delta_ak < a - 1; returns
    sqrt((1 + delta_k) / (a * (1 - delta_ak))) or None when the
    condition fails.
    """
    if a <= 1:
        raise ValueError("the oversampling factor a must exceed 1")
    if delta_k < 0 or delta_ak < 0 or not (math.isfinite(delta_k) and math.isfinite(delta_ak)):
        raise ValueError("isometry constants must be finite and nonnegative")
    if delta_k + a * delta_ak >= a - 1:
        return None
    return math.sqrt((1.0 + delta_k) / (a * (1.0 - delta_ak)))


def bound_csp_error(beta: float, sigma_min: float, eps: float) -> BoundReport:
    """Worst-case 2-norm decoding error from a column-space gain certificate."""
    if sigma_min <= 0:
        raise ValueError("sigma_min must be positive")
    if eps < 0 or beta < 0:
        raise ValueError("beta and eps must be nonnegative")
    ok = beta < 1
    value = 2.0 * (1.0 + beta) * eps / (sigma_min * (1.0 - beta)) if ok else math.inf
    return BoundReport(kind="csp", value=value, condition_ok=ok,
                       inputs={"beta": beta, "sigma_min": sigma_min, "eps": eps})


def _checked_atk(a: float, t_horizon: int, k: int) -> float:
    atk = a * t_horizon * k
    if abs(atk - round(atk)) > 1e-9:
        raise ValueError("a * T * k must be an integer")
    return atk


def bound_rip_error(sigma_min: float | None, delta: float | None, a: float,
                    t_horizon: int, k: int, eps: float,
                    mu1: float | None = None) -> BoundReport:
    """Worst-case error bound 2*eps / (mu1 * sqrt(a*T*k)).

    With mu1 absent it is set to the largest admissible value,
    sigma_min - (1/sqrt(a) + 1) * sqrt(1 + delta). Preconditions
    (a > 1, a > 1/(sigma_min-1)^2, integer a*T*k) raise; the margin
    requirement mu1 > 0 is reported through condition_ok instead.
    """
    if a <= 1:
        raise ValueError("the oversampling factor a must exceed 1")
    if t_horizon < 1 or k < 1 or eps < 0:
        raise ValueError("horizon, sparsity and eps must be admissible")
    atk = _checked_atk(a, t_horizon, k)
    if sigma_min is not None:
        if sigma_min <= 1:
            raise ValueError("sigma_min must exceed 1 (a > 1/(sigma_min-1)^2 is unsatisfiable)")
        if a <= 1.0 / (sigma_min - 1.0) ** 2:
            raise ValueError("a must exceed 1/(sigma_min-1)^2")
    ceiling = None
    if sigma_min is not None and delta is not None:
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        ceiling = sigma_min - (1.0 / math.sqrt(a) + 1.0) * math.sqrt(1.0 + delta)
    if mu1 is None:
        if ceiling is None:
            raise ValueError("either mu1 or (sigma_min, delta) must be given")
        mu1 = ceiling
        ok = mu1 > 0
    else:
        ok = mu1 > 0 and (ceiling is None or mu1 <= ceiling + 1e-12)
    value = 2.0 * eps / (mu1 * math.sqrt(atk)) if ok else math.inf
    return BoundReport(kind="rip", value=value, condition_ok=ok,
                       inputs={"sigma_min": sigma_min, "delta": delta, "a": a,
                               "t_horizon": t_horizon, "k": k, "eps": eps, "mu1": mu1})


def _kappa_of(ppv: float, rho: float) -> float:
    kappa = 1.0 + rho - 2.0 * ppv * rho
    if kappa < -1e-12:
        raise ValueError("inconsistent precision/size ratio (kappa < 0)")
    return max(kappa, 0.0)


def bound_weighted_error(mu1: float, omega: float, ppv: float, rho: float,
                         a: float, delta: float, t_horizon: int, k: int,
                         eps: float) -> BoundReport:
    """Error bound 2*eps / (mu2 * sqrt(a*T*k)) of the weighted decoder.

    mu2 = mu1 + (1-omega) * (1-sqrt(kappa)) / sqrt(a) * sqrt(1+delta)
    with kappa = 1 + rho - 2*ppv*rho. Precision above one half makes
    kappa < 1 and the bound strictly better than the unweighted one.
    """
    if a <= 1:
        raise ValueError("the oversampling factor a must exceed 1")
    if not 0 < omega <= 1:
        raise ValueError("omega must lie in (0, 1]")
    if not 0 < ppv <= 1:
        raise ValueError("ppv must lie in (0, 1]")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if t_horizon < 1 or k < 1 or eps < 0:
        raise ValueError("horizon, sparsity and eps must be admissible")
    if a <= (1.0 - ppv) * rho:
        raise ValueError("a must exceed (1-ppv)*rho")
    atk = _checked_atk(a, t_horizon, k)
    kappa = _kappa_of(ppv, rho)
    mu2 = mu1 + (1.0 - omega) * (1.0 - math.sqrt(kappa)) / math.sqrt(a) * math.sqrt(1.0 + delta)
    ok = mu2 > 0
    value = 2.0 * eps / (mu2 * math.sqrt(atk)) if ok else math.inf
    return BoundReport(kind="weighted", value=value, condition_ok=ok,
                       inputs={"mu1": mu1, "mu2": mu2, "kappa": kappa,
                               "gain": mu2 - mu1, "omega": omega, "ppv": ppv,
                               "rho": rho, "a": a, "delta": delta,
                               "t_horizon": t_horizon, "k": k, "eps": eps})


def weight_surface(omega_grid, ppv_grid, *, rho: float = 1.0, sigma_min: float = 2.0,
                   a: float = 2.0, tk: int = 50, eps: float = 1.0,
                   delta: float = 0.0) -> list[SurfaceCell]:
    """Error bound and isometry ceiling over a (omega, precision) grid.

    Cells are emitted omega-major. delta_upper is the largest isometry
    constant keeping mu2 positive,
    a*sigma_min^2 / (sqrt(a) + omega + (1-omega)*sqrt(kappa))^2 - 1,
    which at omega = 1 reduces to the unweighted ceiling
    a*sigma_min^2 / (sqrt(a) + 1)^2 - 1.
    """
    if sigma_min <= 0 or a <= 1 or tk < 1 or eps < 0 or delta < 0:
        raise ValueError("surface parameters out of range")
    mu1 = sigma_min - (1.0 / math.sqrt(a) + 1.0) * math.sqrt(1.0 + delta)
    if mu1 <= 0:
        raise ValueError("sigma_min too small: the unweighted margin is not positive")
    cells = []
    for omega in omega_grid:
        if not 0 < omega <= 1:
            raise ValueError("omega grid values must lie in (0, 1]")
        for ppv in ppv_grid:
            if not 0 < ppv <= 1:
                raise ValueError("ppv grid values must lie in (0, 1]")
            kappa = _kappa_of(ppv, rho)
            mu2 = mu1 + (1.0 - omega) * (1.0 - math.sqrt(kappa)) / math.sqrt(a) * math.sqrt(1.0 + delta)
            bound = 2.0 * eps / (mu2 * math.sqrt(a * tk)) if mu2 > 0 else math.inf
            dup = a * sigma_min ** 2 / (math.sqrt(a) + omega + (1.0 - omega) * math.sqrt(kappa)) ** 2 - 1.0
            cells.append(SurfaceCell(omega=float(omega), ppv=float(ppv), kappa=kappa,
                                     mu2=mu2, bound=bound, delta_upper=dup))
    return cells
