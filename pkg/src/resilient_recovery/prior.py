"""Noisy attack-location priors and their quality measures.

A localization oracle reports a suspected channel set. Its agreement
probability p flips each channel's membership independently with
probability 1-p. Realized quality is summarized by precision
(ppv = tp / |suspected|), the size ratio rho = |suspected| / |true|,
and kappa = (fp + fn) / |true|, the normalized disagreement that drives
the weighted error bound (kappa < 1 exactly when the prior helps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import flatten_supports
from .util import as_row_array

# Weight assigned to suspected channels when the prior looks better than
# a coin flip, and to the complementary regime.
OMEGA_TRUSTED = 0.01
OMEGA_UNTRUSTED = 0.99


@dataclass(frozen=True)
class SupportPrior:
    """Suspected channels, per block and stacked (1-based indices)."""

    per_block: tuple[frozenset[int], ...]
    stacked: frozenset[int]
    m: int

    def __post_init__(self):
        per_block = tuple(frozenset(int(i) for i in s) for s in self.per_block)
        object.__setattr__(self, "per_block", per_block)
        if flatten_supports(per_block, self.m) != self.stacked:
            raise ValueError("stacked set must be the flattening of the blocks")

    @property
    def width(self) -> int:
        return self.m * len(self.per_block)


@dataclass(frozen=True)
class PriorQuality:
    tp: int
    fp: int
    fn: int
    tn: int
    ppv: float | None
    rho: float | None
    kappa: float | None


def simulate_prior(true_support, p: float, width: int, rng: np.random.Generator,
                   *, m: int | None = None) -> SupportPrior:
    """Draw a prior that agrees with the truth per channel with probability p.

    Membership of every stacked channel is kept with probability p and
    flipped otherwise, independently (one uniform draw per channel, in
    index order). m gives the per-block width; by default the whole
    window is a single block.
    """
    if not 0 <= p <= 1:
        raise ValueError("agreement probability must lie in [0, 1]")
    if m is None:
        m = width
    if m < 1 or width % m != 0:
        raise ValueError("width must be a multiple of the block width")
    rows = as_row_array(true_support, width)
    member = np.zeros(width, dtype=bool)
    member[rows] = True
    agree = rng.random(width) < p
    suspected = member == agree
    idx = np.nonzero(suspected)[0] + 1
    blocks = width // m
    per_block = tuple(
        frozenset(int(i) - j * m for i in idx if j * m < i <= (j + 1) * m)
        for j in range(blocks))
    return SupportPrior(per_block=per_block,
                        stacked=frozenset(int(i) for i in idx), m=m)


def compute_quality(true_support, prior: SupportPrior) -> PriorQuality:
    """Confusion counts and quality ratios of a prior against the truth.

    Undefined ratios (empty suspected set for ppv, empty true set for
    rho and kappa) are reported as None rather than guessed.
    """
    width = prior.width
    true_rows = set(int(i) for i in as_row_array(true_support, width))
    susp_rows = set(int(i) - 1 for i in prior.stacked)
    tp = len(true_rows & susp_rows)
    fp = len(susp_rows - true_rows)
    fn = len(true_rows - susp_rows)
    tn = width - tp - fp - fn
    ppv = tp / (tp + fp) if (tp + fp) > 0 else None
    rho = (tp + fp) / (tp + fn) if (tp + fn) > 0 else None
    kappa = (fp + fn) / (tp + fn) if (tp + fn) > 0 else None
    return PriorQuality(tp=tp, fp=fp, fn=fn, tn=tn, ppv=ppv, rho=rho, kappa=kappa)


def choose_weight(ppv: float | None) -> float:
    """Suspected-channel weight from believed precision.

    Precision strictly above one half earns strong down-weighting;
    at or below one half (or unknown) the weight stays close to 1.
    """
    if ppv is None:
        return OMEGA_UNTRUSTED
    if not 0 <= ppv <= 1:
        raise ValueError("ppv must lie in [0, 1]")
    return OMEGA_TRUSTED if ppv > 0.5 else OMEGA_UNTRUSTED
