"""Dense linear programming via a deterministic two-phase simplex.

Problems are stated as

    minimize    c . x
    subject to  a[i] . x  (<= | = | >=)  b[i]   for every row i
                x[j] >= 0 unless free[j]

and solved on a dense tableau. The solver is a pure function of its
input: entering columns are chosen by most-negative reduced cost with
lowest-index tie-break, switching to Bland's lowest-index rule during
degenerate stretches (which guarantees termination), and leaving rows
break exact ratio ties by smallest basic variable index. Free variables
are encoded internally as differences of nonnegative pairs, so reported
solutions are vertex solutions of the lifted problem.

Statuses are returned as data ("optimal", "infeasible", "unbounded").
Numerical trouble (vanishing pivots, iteration runaway, infeasible
"optimal" points) raises LpNumericalError instead of guessing.

With verify=True an optimal solve also returns the dual vector of the
original rows together with the duality gap, after checking dual
feasibility and that the gap is within DUAL_GAP_TOL of the primal scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE, EQ, GE = "<=", "=", ">="

# Reduced-cost threshold for optimality and ratio-test positivity.
OPT_TOL = 1e-9
PIV_TOL = 1e-9
# Pivot magnitudes below this are a hard numerical error.
DEGEN_PIV_TOL = 1e-12
# Constraint satisfaction required of claimed optima: 1e-9 * (1 + |b_i|).
FEAS_TOL = 1e-9
DUAL_GAP_TOL = 1e-8
# Consecutive degenerate pivots tolerated before falling back to Bland.
_BLAND_TRIGGER = 32


class LpNumericalError(RuntimeError):
    """Simplex could not certify a result at the required tolerances."""


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    senses: tuple[str, ...]
    free: np.ndarray | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=float)
        a = np.ascontiguousarray(self.a, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        if a.ndim != 2:
            raise ValueError("a must be 2-d")
        m, n = a.shape
        if c.shape != (n,) or b.shape != (m,):
            raise ValueError("objective/rhs shapes do not match the matrix")
        senses = tuple(self.senses)
        if len(senses) != m or any(s not in (LE, EQ, GE) for s in senses):
            raise ValueError("senses must be one of <=, =, >= per row")
        free = self.free
        if free is None:
            free = np.zeros(n, dtype=bool)
        else:
            free = np.asarray(free, dtype=bool)
            if free.shape != (n,):
                raise ValueError("free mask must have one flag per variable")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "free", free)

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    @property
    def n_vars(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    dual: np.ndarray | None = field(default=None, repr=False)
    duality_gap: float | None = None


def _simplex_loop_impl(tab, basis, allowed, partner, opt_tol, piv_tol,
                       bland_trigger, max_iters):
    """Pivot the tableau to optimality.

    tab has the m constraint rows first, the reduced-cost row last, and
    the rhs in the final column (cost cell holds -objective). partner[j]
    is the index of the column that is exactly -column j (from splitting
    a free variable), or -1. Returns (status, iterations): 0 optimal,
    1 unbounded, 2 iteration limit, 3 vanishing pivot.
    """
    m = tab.shape[0] - 1
    last = tab.shape[1] - 1
    iters = 0
    degen_run = 0
    # bland_trigger <= 0 pins Bland's rule on for the whole run.
    bland = bland_trigger <= 0
    # Basic columns are never entered, even if roundoff leaves them with a
    # slightly negative reduced cost, and neither is the negated twin of a
    # basic column (its true reduced cost is exactly zero, and admitting
    # it would make the basis singular); otherwise the basis could
    # degenerate.
    enterable = allowed.copy()
    for i in range(m):
        enterable[basis[i]] = False
        tw = partner[basis[i]]
        if tw >= 0:
            enterable[tw] = False
    while iters < max_iters:
        cost = tab[m, :last]
        if bland:
            q = -1
            hits = np.nonzero(enterable & (cost < -opt_tol))[0]
            if hits.size > 0:
                q = hits[0]
        else:
            masked = np.where(enterable, cost, 0.0)
            q = int(np.argmin(masked))
            if masked[q] >= -opt_tol:
                q = -1
        if q < 0:
            return 0, iters
        col = tab[:m, q]
        elig = col > piv_tol
        if not np.any(elig):
            return 1, iters
        ratios = np.full(m, np.inf)
        ratios[elig] = tab[:m, last][elig] / col[elig]
        rmin = ratios.min()
        tied = np.nonzero(ratios == rmin)[0]
        p = int(tied[np.argmin(basis[tied])])
        piv = tab[p, q]
        if abs(piv) < DEGEN_PIV_TOL:
            return 3, iters
        prow = tab[p] / piv
        tab[p, :] = prow
        colq = tab[:, q].copy()
        colq[p] = 0.0
        tab -= np.outer(colq, prow)
        leave = basis[p]
        if allowed[leave]:
            enterable[leave] = True
        tw = partner[leave]
        if tw >= 0 and allowed[tw]:
            enterable[tw] = True
        enterable[q] = False
        tw = partner[q]
        if tw >= 0:
            enterable[tw] = False
        basis[p] = q
        iters += 1
        if rmin <= 0.0:
            degen_run += 1
            if degen_run >= bland_trigger:
                bland = True
        else:
            degen_run = 0
            bland = bland_trigger <= 0
    return 2, iters


def _apply_pivot_impl(tab, basis, p, q):
    piv = tab[p, q]
    prow = tab[p] / piv
    tab[p, :] = prow
    colq = tab[:, q].copy()
    colq[p] = 0.0
    tab -= np.outer(colq, prow)
    basis[p] = q


try:  # optional JIT; the fallback runs the identical arithmetic
    from numba import njit

    _simplex_loop = njit(cache=True)(_simplex_loop_impl)
    _apply_pivot = njit(cache=True)(_apply_pivot_impl)
except ImportError:  # pragma: no cover
    _simplex_loop = _simplex_loop_impl
    _apply_pivot = _apply_pivot_impl

# Pivots between refactorizations. Rebuilding the tableau from the
# original data caps roundoff accumulation independently of path length.
# Retries after a numerical failure refactor every pivot: entering
# decisions then always see fresh numbers, so structurally dependent
# columns (whose true tableau entries are exact zeros) cannot sneak into
# the basis through stale roundoff.
_REFACTOR_EVERY = 128
_RETRY_REFACTOR_EVERY = 1
# Retries also demand larger pivots: near a numerically singular basis the
# refactorization itself carries errors above PIV_TOL, so tiny "eligible"
# entries cannot be trusted. Verdict acceptance stays at the strict PIV_TOL.
_RETRY_PIV_TOL = 1e-7


def _refactor(tab, basis, c_phase, a_ref, b_ref):
    """Rebuild the tableau for the current basis from original data."""
    m = a_ref.shape[0]
    ncols = a_ref.shape[1]
    if m:
        bmat = a_ref[:, basis]
        try:
            sol = np.linalg.solve(bmat, np.hstack([a_ref, b_ref[:, None]]))
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis during refactorization") from exc
        if not np.all(np.isfinite(sol)):
            raise LpNumericalError("singular basis during refactorization")
        tab[:m, :] = sol
        cb = c_phase[basis]
        tab[m, :ncols] = c_phase - cb @ tab[:m, :ncols]
        tab[m, ncols] = -(cb @ tab[:m, ncols])
    else:
        tab[m, :ncols] = c_phase
        tab[m, ncols] = 0.0


def _pivot_phase(tab, basis, allowed, partner, c_phase, a_ref, b_ref,
                 max_iters, refactor_every, bland_trigger, piv_tol):
    """Chunked simplex with periodic refactorization.

    Optimal and unbounded verdicts are only accepted when they hold on a
    freshly refactored tableau. Returns (0 optimal | 1 unbounded, iters).
    """
    m = a_ref.shape[0]
    ncols = a_ref.shape[1]
    _refactor(tab, basis, c_phase, a_ref, b_ref)
    total = 0
    stall = 0
    while True:
        chunk = min(refactor_every, max_iters - total)
        code, iters = _simplex_loop(tab, basis, allowed, partner, OPT_TOL,
                                    piv_tol, bland_trigger, chunk)
        total += int(iters)
        _refactor(tab, basis, c_phase, a_ref, b_ref)
        enterable = allowed.copy()
        enterable[basis] = False
        tw = partner[basis]
        enterable[tw[tw >= 0]] = False
        cost = tab[m, :ncols]
        improving = enterable & (cost < -OPT_TOL)
        if code == 0 and not np.any(improving):
            return 0, total
        if code == 1:
            masked = np.where(enterable, cost, 0.0)
            q = int(np.argmin(masked))
            if masked[q] < -OPT_TOL and not np.any(tab[:m, q] > PIV_TOL):
                return 1, total
        if code == 3 and iters == 0:
            raise LpNumericalError("pivot below 1e-12 (degenerate tableau)")
        stall = stall + 1 if iters == 0 else 0
        if stall >= 4:
            raise LpNumericalError("simplex stalled without progress")
        if total >= max_iters:
            raise LpNumericalError("iteration limit exceeded")


def solve_lp(problem: LpProblem, *, verify: bool = False, max_iters: int | None = None) -> LpSolution:
    """Solve an LpProblem, deterministically.

    verify=True additionally computes the dual certificate for optimal
    statuses and raises LpNumericalError if it is not feasible or the
    duality gap exceeds DUAL_GAP_TOL * (1 + |objective|).

    A solve that fails numerically (singular basis, stall, infeasible
    claimed optimum) is retried once with refactorization after every
    pivot and a stricter pivot-eligibility threshold before the error is
    propagated; both attempts are deterministic.
    """
    try:
        return _solve_core(problem, verify, max_iters, _REFACTOR_EVERY,
                           _BLAND_TRIGGER, PIV_TOL)
    except LpNumericalError:
        return _solve_core(problem, verify, max_iters, _RETRY_REFACTOR_EVERY,
                           _BLAND_TRIGGER, _RETRY_PIV_TOL)


def _solve_core(problem, verify, max_iters, refactor_every, bland_trigger,
                piv_tol):
    m, n = problem.n_rows, problem.n_vars
    a = problem.a.copy()
    b = problem.b.copy()
    senses = list(problem.senses)
    flip = b < 0
    if np.any(flip):
        a[flip] *= -1.0
        b[flip] *= -1.0
        for i in np.nonzero(flip)[0]:
            if senses[i] == LE:
                senses[i] = GE
            elif senses[i] == GE:
                senses[i] = LE

    free_idx = np.nonzero(problem.free)[0]
    ineq_rows = [i for i, s in enumerate(senses) if s != EQ]
    blocks = [a]
    c_parts = [problem.c]
    if free_idx.size:
        blocks.append(-a[:, free_idx])
        c_parts.append(-problem.c[free_idx])
    n_struct = n + free_idx.size
    if ineq_rows:
        s_block = np.zeros((m, len(ineq_rows)))
        for j, i in enumerate(ineq_rows):
            s_block[i, j] = 1.0 if senses[i] == LE else -1.0
        blocks.append(s_block)
        c_parts.append(np.zeros(len(ineq_rows)))

    a_std = np.hstack(blocks) if blocks else np.zeros((m, 0))
    c_std = np.concatenate(c_parts)

    basis = np.full(m, -1, dtype=np.int64)
    for j, i in enumerate(ineq_rows):
        if senses[i] == LE:
            basis[i] = n_struct + j

    # Crash start: a structural column whose single nonzero is positive in a
    # basisless row can serve as that row's initial basic variable.
    need = [i for i in range(m) if basis[i] < 0]
    if need:
        nz_count = np.count_nonzero(a_std, axis=0)
        taken = set(basis[basis >= 0].tolist())
        for j in range(a_std.shape[1]):
            if not need:
                break
            if nz_count[j] != 1 or j in taken:
                continue
            i = int(np.nonzero(a_std[:, j])[0][0])
            if basis[i] < 0 and a_std[i, j] > 0:
                basis[i] = j
                need.remove(i)

    art_rows = [i for i in range(m) if basis[i] < 0]
    n_before_art = a_std.shape[1]
    if art_rows:
        art_block = np.zeros((m, len(art_rows)))
        for j, i in enumerate(art_rows):
            art_block[i, j] = 1.0
            basis[i] = n_before_art + j
        a_std = np.hstack([a_std, art_block])
        c_std = np.concatenate([c_std, np.zeros(len(art_rows))])
    ncols = a_std.shape[1]

    # Scale each row by its basic coefficient so the starting basis is the
    # identity; every initial basic column is a positive singleton.
    coef = a_std[np.arange(m), basis].copy() if m else np.zeros(0)
    row_scale = np.ones(m)
    if m:
        row_scale = 1.0 / coef
        a_std = a_std * row_scale[:, None]
        b_sc = b * row_scale
    else:
        b_sc = b.copy()

    a_solved = a_std.copy()
    b_solved = b_sc.copy()

    tab = np.zeros((m + 1, ncols + 1))
    tab[:m, :ncols] = a_std
    tab[:m, ncols] = b_sc
    allowed = np.ones(ncols, dtype=bool)
    if art_rows:
        allowed[n_before_art:] = False
    partner = np.full(ncols, -1, dtype=np.int64)
    for pos, j in enumerate(free_idx):
        partner[j] = n + pos
        partner[n + pos] = j

    if max_iters is None:
        max_iters = 200 * (m + ncols) + 1000

    total_iters = 0
    kept_rows = np.arange(m)

    if art_rows:
        c1 = np.zeros(ncols)
        c1[n_before_art:] = 1.0
        status, iters = _pivot_phase(tab, basis, allowed, partner, c1,
                                     a_solved, b_solved, max_iters,
                                     refactor_every, bland_trigger, piv_tol)
        total_iters += int(iters)
        if status == 1:
            raise LpNumericalError("phase-1 problem reported unbounded")
        phase1_obj = -tab[m, ncols]
        if phase1_obj > FEAS_TOL * (1.0 + float(np.max(b_sc, initial=0.0))):
            return LpSolution(INFEASIBLE, None, None, total_iters)
        # Drive leftover artificials out of the basis; all-zero rows are
        # redundant constraints and get dropped.
        drop = []
        for i in range(m):
            if basis[i] >= n_before_art:
                row = tab[i, :n_before_art]
                blocked = np.zeros(ncols, dtype=bool)
                blocked[basis] = True
                tw = partner[basis]
                blocked[tw[tw >= 0]] = True
                cand = np.nonzero((np.abs(row) > PIV_TOL) & ~blocked[:n_before_art])[0]
                if cand.size:
                    _apply_pivot(tab, basis, i, int(cand[0]))
                else:
                    drop.append(i)
        if drop:
            keep = np.setdiff1d(np.arange(m), np.asarray(drop))
            tab = np.ascontiguousarray(np.vstack([tab[keep], tab[m:]]))
            basis = basis[keep].copy()
            kept_rows = kept_rows[keep]
            a_solved = a_solved[keep]
            b_solved = b_solved[keep]
            m = keep.size

    status, iters = _pivot_phase(tab, basis, allowed, partner, c_std,
                                 a_solved, b_solved, max_iters,
                                 refactor_every, bland_trigger, piv_tol)
    total_iters += int(iters)
    if status == 1:
        return LpSolution(UNBOUNDED, None, None, total_iters)
    mrows = m

    z = np.zeros(ncols)
    if mrows:
        z[basis] = tab[:mrows, ncols]
    x = z[:n].copy()
    if free_idx.size:
        x[free_idx] -= z[n:n + free_idx.size]
    objective = float(problem.c @ x)

    resid = problem.a @ x - problem.b
    tol = FEAS_TOL * (1.0 + np.abs(problem.b))
    for i, s in enumerate(problem.senses):
        bad = (s == LE and resid[i] > tol[i]) or \
              (s == GE and resid[i] < -tol[i]) or \
              (s == EQ and abs(resid[i]) > tol[i])
        if bad:
            raise LpNumericalError(
                f"claimed optimum violates row {i} by {abs(resid[i]):.3e}")

    dual = None
    gap = None
    if verify:
        dual, gap = _dual_certificate(a_solved, b_solved, c_std, basis, objective,
                                      kept_rows, row_scale, flip, problem.n_rows,
                                      n_before_art)
    return LpSolution(OPTIMAL, x, objective, total_iters, dual, gap)


def _dual_certificate(a_solved, b_solved, c_std, basis, objective,
                      kept_rows, row_scale, flip, m_orig, n_real):
    """Dual vector from the final basis, checked for feasibility and gap.

    Feasibility is checked on the real columns only; phase-1 artificial
    columns stay in a_solved for refactorization but carry no dual
    constraint.
    """
    mrows = a_solved.shape[0]
    if mrows == 0:
        return np.zeros(m_orig), abs(objective)
    bmat = a_solved[:, basis]
    try:
        y = np.linalg.solve(bmat.T, c_std[basis])
    except np.linalg.LinAlgError as exc:
        raise LpNumericalError("singular basis while extracting duals") from exc
    scale = 1.0 + float(np.max(np.abs(c_std)))
    slack = c_std[:n_real] - y @ a_solved[:, :n_real]
    if float(slack.min(initial=0.0)) < -1e-7 * scale:
        raise LpNumericalError("dual certificate infeasible")
    gap = abs(float(b_solved @ y) - objective)
    if gap > DUAL_GAP_TOL * (1.0 + abs(objective)):
        raise LpNumericalError(f"duality gap {gap:.3e} too large")
    dual = np.zeros(m_orig)
    dual[kept_rows] = y * row_scale[kept_rows]
    sign = np.where(flip, -1.0, 1.0)
    dual *= sign
    return dual, gap
