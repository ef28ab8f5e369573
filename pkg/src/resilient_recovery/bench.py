"""Monte Carlo recovery experiments over grids of system sizes.

Every trial gets its own generator seeded from (master seed, cell index,
trial index, stream), so aggregates are identical for any execution
order or degree of parallelism. Stream 0 drives the trial body (system,
state, attacked channels, attack design); stream 1 drives the prior
draw, which keeps systems and attacks paired across prior settings.

A trial samples a Gaussian system with m_eff = max(m, n) channels,
attacks floor(m_eff * p_attack) channels per block with the designed
worst-case corruption (budget eps, noise-free), decodes, and scores
success as a relative 2-norm error within rel_tol.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .attack import AttackDesignError, design_attack, nullspace_attack
from .decode import is_successful_recovery, l1_decode, make_weights, weighted_l1_decode
from .lp import LpNumericalError
from .model import (AttackScenario, UnobservableWindowError, build_observability,
                    flatten_supports, random_system, simulate_window)
from .prior import choose_weight, compute_quality, simulate_prior
from .util import as_row_array, complement_rows, derive_seed, has_full_column_rank

logger = logging.getLogger(__name__)

# Reference grid of the full-scale phase-transition experiment; stride
# subsamples both axes.
M_STEP = 4
N_STEP = 2
# Largest attacked set solved by exact enumeration inside trials.
_BENCH_EXACT_LIMIT = 6


class ConfigError(ValueError):
    """Experiment configuration is malformed."""


_CONFIG_KEYS = ("m_range", "n_range", "stride", "p_attack", "agreement",
                "omega_policy", "trials", "horizon", "eps", "seed", "rel_tol")


@dataclass(frozen=True)
class ExperimentConfig:
    m_range: tuple[int, int] = (10, 86)
    n_range: tuple[int, int] = (5, 43)
    stride: int = 4
    p_attack: float | tuple[float, ...] = 0.4
    agreement: float | tuple[float, ...] | None = None
    omega_policy: str | float = "auto"
    trials: int = 500
    horizon: int = 1
    eps: float = 1.0
    seed: int = 0
    rel_tol: float = 1e-3

    def __post_init__(self):
        m_range = tuple(int(v) for v in self.m_range)
        n_range = tuple(int(v) for v in self.n_range)
        if len(m_range) != 2 or len(n_range) != 2:
            raise ConfigError("m_range and n_range must be [lo, hi] pairs")
        if m_range[0] < 1 or m_range[0] > m_range[1] or n_range[0] < 1 or n_range[0] > n_range[1]:
            raise ConfigError("ranges must satisfy 1 <= lo <= hi")
        object.__setattr__(self, "m_range", m_range)
        object.__setattr__(self, "n_range", n_range)
        if self.stride < 1:
            raise ConfigError("stride must be a positive integer")
        p_attack = self.p_attack
        if isinstance(p_attack, (list, tuple, np.ndarray)):
            p_attack = tuple(float(p) for p in p_attack)
            values = p_attack
        else:
            p_attack = float(p_attack)
            values = (p_attack,)
        if not values or any(not 0 <= p <= 1 for p in values):
            raise ConfigError("p_attack values must lie in [0, 1]")
        object.__setattr__(self, "p_attack", p_attack)
        agreement = self.agreement
        if agreement is not None:
            if isinstance(agreement, (list, tuple, np.ndarray)):
                agreement = tuple(float(p) for p in agreement)
                values = agreement
            else:
                agreement = float(agreement)
                values = (agreement,)
            if not values or any(not 0 <= p <= 1 for p in values):
                raise ConfigError("agreement values must lie in [0, 1]")
        object.__setattr__(self, "agreement", agreement)
        policy = self.omega_policy
        if isinstance(policy, str):
            if policy not in ("auto", "ppv"):
                raise ConfigError("omega_policy must be 'auto', 'ppv', or a weight in (0, 1]")
        else:
            policy = float(policy)
            if not 0 < policy <= 1:
                raise ConfigError("a numeric omega_policy must lie in (0, 1]")
        object.__setattr__(self, "omega_policy", policy)
        if self.trials < 1 or self.horizon < 1:
            raise ConfigError("trials and horizon must be positive")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_mapping(data)

    @property
    def m_values(self) -> tuple[int, ...]:
        base = list(range(self.m_range[0], self.m_range[1] + 1, M_STEP))
        return tuple(base[::self.stride])

    @property
    def n_values(self) -> tuple[int, ...]:
        base = list(range(self.n_range[0], self.n_range[1] + 1, N_STEP))
        return tuple(base[::self.stride])

    def cells(self) -> list[tuple[int, int]]:
        """Grid cells in row-major (m outer, n inner) order."""
        return [(m, n) for m in self.m_values for n in self.n_values]

    def scalar_p_attack(self) -> float:
        if isinstance(self.p_attack, tuple):
            raise ConfigError("this command needs a single p_attack value")
        return self.p_attack

    def scalar_agreement(self) -> float | None:
        if isinstance(self.agreement, tuple):
            raise ConfigError("this command needs a single agreement value")
        return self.agreement


@dataclass(frozen=True)
class SweepRow:
    m: int
    n: int
    p_attack: float
    agreement: float | None
    omega: float | str | None
    trials: int
    successes: int
    ratio: float


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    seed: int
    version: str = field(default=__version__)


@dataclass(frozen=True)
class ScurveRow:
    p_attack: float
    setting: str
    ratio: float
    stderr: float


def _synthesize_attack(h: np.ndarray, stacked: frozenset[int], eps: float,
                       n: int, rng: np.random.Generator) -> np.ndarray:
    """Designed worst-case corruption on the stacked support, or zeros."""
    width = h.shape[0]
    e = np.zeros(width)
    if not stacked:
        return e
    rows = as_row_array(stacked, width)
    comp = complement_rows(rows, width)
    if comp.size < n or not has_full_column_rank(h[comp]):
        na = nullspace_attack(h, stacked, scale=eps)
        return na[1] if na is not None else e
    try:
        design = design_attack(h, stacked, eps, exact_limit=_BENCH_EXACT_LIMIT,
                               starts=1, ascent_iters=6, rng=rng)
        return design.e
    except AttackDesignError:
        na = nullspace_attack(h, stacked, scale=eps)
        return na[1] if na is not None else e


def _build_trial(cfg: ExperimentConfig, m: int, n: int, p_attack: float,
                 rng: np.random.Generator):
    """System, window, and truth shared by every decoding setting."""
    m_eff = max(m, n)
    sysm = random_system(m_eff, n, rng, horizon=cfg.horizon)
    h = build_observability(sysm, cfg.horizon)
    x0 = rng.standard_normal(n)
    k = int(m_eff * p_attack)
    supports = []
    for _ in range(cfg.horizon):
        if k > 0:
            chans = np.sort(rng.choice(m_eff, size=k, replace=False)) + 1
            supports.append(frozenset(int(c) for c in chans))
        else:
            supports.append(frozenset())
    stacked = flatten_supports(supports, m_eff)
    e = _synthesize_attack(h, stacked, cfg.eps, n, rng)
    scenario = AttackScenario(supports=tuple(supports), e=e, k=k, eps=cfg.eps)
    window = simulate_window(sysm, x0, cfg.horizon, scenario, rng)
    return window, x0, stacked, m_eff


def _resolve_omega(cfg: ExperimentConfig, agreement: float,
                   stacked: frozenset[int], prior) -> float:
    if cfg.omega_policy == "auto":
        return choose_weight(agreement)
    if cfg.omega_policy == "ppv":
        return choose_weight(compute_quality(stacked, prior).ppv)
    return float(cfg.omega_policy)


def _decode_setting(cfg: ExperimentConfig, window, x0, stacked, m_eff,
                    agreement: float | None, prior_seed: int) -> bool:
    if agreement is None:
        est = l1_decode(window)
    else:
        prng = np.random.default_rng(prior_seed)
        prior = simulate_prior(stacked, agreement, window.width, prng, m=m_eff)
        omega = _resolve_omega(cfg, agreement, stacked, prior)
        weights = make_weights(prior.stacked, omega, window.width)
        est = weighted_l1_decode(window, weights)
    return is_successful_recovery(est.x_hat, x0, cfg.rel_tol)


def run_cell(cfg: ExperimentConfig, m: int, n: int, cell_index: int) -> tuple[int, int]:
    """(successes, trials) for one grid cell.

    Decoder failures inside a trial are logged and scored unsuccessful;
    they never abort the sweep.
    """
    p_attack = cfg.scalar_p_attack()
    agreement = cfg.scalar_agreement()
    successes = 0
    for t in range(cfg.trials):
        rng = np.random.default_rng(derive_seed(cfg.seed, cell_index, t, 0))
        try:
            window, x0, stacked, m_eff = _build_trial(cfg, m, n, p_attack, rng)
            ok = _decode_setting(cfg, window, x0, stacked, m_eff, agreement,
                                 derive_seed(cfg.seed, cell_index, t, 1))
        except (LpNumericalError, UnobservableWindowError) as exc:
            logger.warning("trial (cell=%d, trial=%d) failed: %s", cell_index, t, exc)
            ok = False
        successes += int(ok)
    return successes, cfg.trials


def _sweep_cell_worker(args) -> tuple[int, int, int]:
    cfg, m, n, idx = args
    successes, trials = run_cell(cfg, m, n, idx)
    return idx, successes, trials


def _resolved_sweep_omega(cfg: ExperimentConfig, agreement):
    if agreement is None:
        return None
    if cfg.omega_policy == "ppv":
        return "ppv"
    if cfg.omega_policy == "auto":
        return choose_weight(agreement)
    return float(cfg.omega_policy)


def run_sweep(cfg: ExperimentConfig, *, jobs: int = 1, partial_path=None) -> SweepResult:
    """Success ratios over the whole grid, one row per cell.

    With partial_path set, completed rows are flushed after every cell
    and an interrupted run leaves the file ending in a resume marker
    comment naming the next cell index.
    """
    p_attack = cfg.scalar_p_attack()
    agreement = cfg.scalar_agreement()
    omega = _resolved_sweep_omega(cfg, agreement)
    cells = cfg.cells()
    work = [(cfg, m, n, idx) for idx, (m, n) in enumerate(cells)]
    rows: list[SweepRow] = []

    def take(idx: int, successes: int, trials: int) -> None:
        m, n = cells[idx]
        rows.append(SweepRow(m=m, n=n, p_attack=p_attack, agreement=agreement,
                             omega=omega, trials=trials, successes=successes,
                             ratio=successes / trials))
        if partial_path is not None:
            partial = SweepResult(rows=list(rows), seed=cfg.seed)
            write_sweep_csv(partial, partial_path,
                            resume_next=idx + 1 if idx + 1 < len(cells) else None)

    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for idx, successes, trials in pool.map(_sweep_cell_worker, work):
                    take(idx, successes, trials)
        else:
            for args in work:
                take(*_sweep_cell_worker(args))
    except BaseException:
        if partial_path is not None and rows:
            partial = SweepResult(rows=list(rows), seed=cfg.seed)
            write_sweep_csv(partial, partial_path, resume_next=len(rows))
        raise
    return SweepResult(rows=rows, seed=cfg.seed)


def _scurve_point_worker(args) -> tuple[int, list[tuple[int, int]]]:
    cfg, m, n, p_idx, p_attack, settings = args
    counts = [0 for _ in settings]
    for t in range(cfg.trials):
        rng = np.random.default_rng(derive_seed(cfg.seed, p_idx, t, 0))
        prior_seed = derive_seed(cfg.seed, p_idx, t, 1)
        try:
            window, x0, stacked, m_eff = _build_trial(cfg, m, n, p_attack, rng)
        except (LpNumericalError, UnobservableWindowError) as exc:
            logger.warning("trial (p=%g, trial=%d) failed: %s", p_attack, t, exc)
            continue
        for j, agreement in enumerate(settings):
            try:
                ok = _decode_setting(cfg, window, x0, stacked, m_eff, agreement, prior_seed)
            except LpNumericalError as exc:
                logger.warning("decode (p=%g, trial=%d, setting=%s) failed: %s",
                               p_attack, t, agreement, exc)
                ok = False
            counts[j] += int(ok)
    return p_idx, [(c, cfg.trials) for c in counts]


def run_scurve(cfg: ExperimentConfig, *, jobs: int = 1) -> list[ScurveRow]:
    """Success against attacked fraction at one fixed (m, n) cell.

    p_attack must be a list in the config; settings are the unweighted
    decoder ("none") followed by one weighted run per agreement value.
    All settings share each trial's system and attack (paired trials).
    """
    if len(cfg.m_values) != 1 or len(cfg.n_values) != 1:
        raise ConfigError("scurve needs single-cell m_range and n_range")
    m, n = cfg.m_values[0], cfg.n_values[0]
    p_values = cfg.p_attack if isinstance(cfg.p_attack, tuple) else (cfg.p_attack,)
    if cfg.agreement is None:
        agreements: tuple[float, ...] = ()
    elif isinstance(cfg.agreement, tuple):
        agreements = cfg.agreement
    else:
        agreements = (cfg.agreement,)
    settings: list[float | None] = [None, *agreements]
    work = [(cfg, m, n, p_idx, p, settings) for p_idx, p in enumerate(p_values)]
    outcomes: dict[int, list[tuple[int, int]]] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for p_idx, counts in pool.map(_scurve_point_worker, work):
                outcomes[p_idx] = counts
    else:
        for args in work:
            p_idx, counts = _scurve_point_worker(args)
            outcomes[p_idx] = counts
    rows = []
    for p_idx, p in enumerate(p_values):
        for j, agreement in enumerate(settings):
            successes, trials = outcomes[p_idx][j]
            ratio = successes / trials
            stderr = math.sqrt(ratio * (1.0 - ratio) / trials)
            label = "none" if agreement is None else f"{agreement:g}"
            rows.append(ScurveRow(p_attack=p, setting=label, ratio=ratio, stderr=stderr))
    return rows


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return f"{value:.6f}" if not value.is_integer() else f"{value:g}"
    return str(value)


def write_sweep_csv(result: SweepResult, path, *, resume_next: int | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# seed={result.seed} version={result.version}\n")
        fh.write("m,n,p_attack,agreement,omega,trials,successes,ratio\n")
        for r in result.rows:
            fh.write(",".join([str(r.m), str(r.n), _fmt(float(r.p_attack)),
                               _fmt(r.agreement if r.agreement is None else float(r.agreement)),
                               _fmt(r.omega if isinstance(r.omega, (str, type(None))) else float(r.omega)),
                               str(r.trials), str(r.successes), f"{r.ratio:.6f}"]) + "\n")
        if resume_next is not None:
            fh.write(f"# resume_next_cell={resume_next}\n")


def write_scurve_csv(rows: list[ScurveRow], seed: int, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# seed={seed} version={__version__}\n")
        fh.write("p_attack,setting,ratio,stderr\n")
        for r in rows:
            fh.write(f"{_fmt(float(r.p_attack))},{r.setting},{r.ratio:.6f},{r.stderr:.6f}\n")
