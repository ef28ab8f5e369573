"""Linear system models, stacked observation windows, attack scenarios.

A window of T measurement steps against the dynamics x' = A x, y = C x + e
is flattened into a single linear observation

    y_stacked = H x0 + e_stacked

where x0 is the state at the start of the window and H stacks the blocks
C A^(T-1), ..., C A, C from top to bottom (latest measurement first).
Stacked row indices are 1-based: block j (0-based, top first) of channel
l occupies row j*m + l.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .util import RANK_RTOL, as_row_array, has_full_column_rank


class UnobservableWindowError(ValueError):
    """The stacked observation matrix does not determine the state."""


@dataclass(frozen=True)
class LtiSystem:
    """Autonomous linear dynamics with a linear measurement map."""

    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("state matrix must be square")
        if c.ndim != 2 or c.shape[1] != a.shape[0]:
            raise ValueError("measurement matrix must map the state dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_channels(self) -> int:
        return self.c.shape[0]


def build_observability(sys: LtiSystem, horizon: int) -> np.ndarray:
    """Stacked observation matrix for a T-step window, latest block on top.

    Raises UnobservableWindowError when the stack is column-rank deficient
    (smallest singular value at or below RANK_RTOL times the largest);
    decoders refuse to run on such matrices.
    """
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    n = sys.n_states
    blocks = []
    power = np.eye(n)
    for _ in range(horizon):
        blocks.append(sys.c @ power)
        power = sys.a @ power
    h = np.vstack(blocks[::-1])
    if not has_full_column_rank(h, RANK_RTOL):
        raise UnobservableWindowError(
            f"window of horizon {horizon} does not determine the state "
            f"({h.shape[0]}x{h.shape[1]} stack is rank deficient)")
    return h


@dataclass(frozen=True)
class ObservationWindow:
    """Measurements of one window together with its stacked matrix."""

    horizon: int
    h: np.ndarray
    y: np.ndarray
    base_state: np.ndarray | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if h.ndim != 2 or y.ndim != 1 or y.shape[0] != h.shape[0]:
            raise ValueError("measurement vector must have one entry per stacked row")
        if h.shape[0] % self.horizon != 0:
            raise ValueError("stacked rows must split evenly across the horizon")
        if not has_full_column_rank(h, RANK_RTOL):
            raise UnobservableWindowError("stacked observation matrix is rank deficient")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "y", y)
        if self.base_state is not None:
            object.__setattr__(self, "base_state", np.asarray(self.base_state, dtype=float))

    @property
    def width(self) -> int:
        return self.h.shape[0]

    @property
    def n_channels(self) -> int:
        return self.h.shape[0] // self.horizon


def flatten_supports(supports, m: int) -> frozenset[int]:
    """Stacked 1-based index set for per-block channel supports.

    supports are listed in stacking order (same order as the blocks of the
    observation matrix); block j shifts its channel indices by j*m.
    """
    flat = set()
    for j, supp in enumerate(supports):
        rows = as_row_array(supp, m)
        flat.update(int(r) + 1 + j * m for r in rows)
    return frozenset(flat)


@dataclass(frozen=True)
class AttackScenario:
    """Sparse corruption of a window: per-block supports plus dense noise.

    e is the full stacked error. Entries on the stacked support are the
    attack; off-support entries are noise and must have 1-norm strictly
    below the budget eps.
    """

    supports: tuple[frozenset[int], ...]
    e: np.ndarray
    k: int
    eps: float
    stacked_support: frozenset[int] = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        supports = tuple(frozenset(int(i) for i in s) for s in self.supports)
        if not supports:
            raise ValueError("at least one per-block support is required")
        if e.ndim != 1 or e.shape[0] % len(supports) != 0:
            raise ValueError("error vector length must be horizon * channels")
        m = e.shape[0] // len(supports)
        if self.k < 0:
            raise ValueError("per-step sparsity bound must be nonnegative")
        if any(len(s) > self.k for s in supports):
            raise ValueError("a per-block support exceeds the sparsity bound")
        if not self.eps > 0:
            raise ValueError("noise budget must be positive")
        stacked = flatten_supports(supports, m)
        off = [i - 1 for i in range(1, e.shape[0] + 1) if i not in stacked]
        if float(np.sum(np.abs(e[off]))) >= self.eps:
            raise ValueError("off-support noise 1-norm must stay below the budget")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "stacked_support", stacked)

    @property
    def n_channels(self) -> int:
        return self.e.shape[0] // len(self.supports)


def simulate_window(sys: LtiSystem, x0: np.ndarray, horizon: int,
                    scenario: AttackScenario, rng=None) -> ObservationWindow:
    """Window measurements y = H x0 + e for a given scenario.

    rng is accepted so call sites can pass their stream uniformly; the
    window is fully determined by (sys, x0, scenario).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n_states,):
        raise ValueError("initial state has the wrong dimension")
    h = build_observability(sys, horizon)
    if scenario.e.shape[0] != h.shape[0]:
        raise ValueError("scenario error vector does not match the stacked window")
    y = h @ x0 + scenario.e
    return ObservationWindow(horizon=horizon, h=h, y=y, base_state=x0)


def random_system(m: int, n: int, rng: np.random.Generator, *,
                  horizon: int = 1, spectral_radius: float | None = None,
                  max_tries: int = 64) -> LtiSystem:
    """Random Gaussian system with an observable horizon-T window.

    Requires m >= n (redundant sensing). Each try draws A then C from the
    standard normal; A is optionally rescaled to the given spectral radius.
    Retries until the stacked window has full column rank.
    """
    if m < n:
        raise ValueError("need at least as many channels as states (m >= n)")
    for _ in range(max_tries):
        a = rng.standard_normal((n, n))
        if spectral_radius is not None:
            radius = float(np.max(np.abs(np.linalg.eigvals(a))))
            if radius > 0:
                a *= spectral_radius / radius
        c = rng.standard_normal((m, n))
        sys = LtiSystem(a=a, c=c)
        try:
            build_observability(sys, horizon)
        except UnobservableWindowError:
            continue
        return sys
    raise UnobservableWindowError(
        f"no observable system found in {max_tries} tries for m={m}, n={n}")
