"""Core spinner for the tipsy cop-and-robber game.

Each round of the game spins a four-sided spinner to decide who moves and
whether the move is deliberate (sober) or a uniformly random stumble (tipsy).
The outcome probabilities are the four game parameters c, r, t_c, t_r, which
must sum to one.  Everything downstream (grid walks, tree walks, the Monte
Carlo engine and the truncated-chain oracle) consumes the same spinner, so the
mapping from a uniform draw to an outcome is part of the reproducibility
contract and must never change.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance for probability bookkeeping (sum-to-one, half-splits).
PROB_TOL = 1e-12

GRID = "grid"
TREE = "tree"


class SpinnerOutcome(enum.Enum):
    SOBER_COP = "SoberCop"
    SOBER_ROBBER = "SoberRobber"
    TIPSY_COP = "TipsyCop"
    TIPSY_ROBBER = "TipsyRobber"


@dataclass(frozen=True)
class GameParams:
    """Spinner probabilities plus the arena they apply to.

    c    -- probability the cop moves deliberately this round
    r    -- probability the robber moves deliberately
    t_c  -- probability the cop stumbles to a uniform random neighbor
    t_r  -- probability the robber stumbles
    mode -- "grid" or "tree"; tree mode additionally requires each player's
            total move rate to be exactly one half (c + t_c = r + t_r = 1/2).
    """

    c: float
    r: float
    t_c: float
    t_r: float
    mode: str = GRID

    @property
    def t(self) -> float:
        """Combined tipsiness t_c + t_r (the only way tipsy mass enters
        several downstream formulas)."""
        return self.t_c + self.t_r


def validate(params: GameParams) -> None:
    """Check a parameter set, raising ValueError naming the failed constraint.

    Violations are never silently repaired (no renormalisation): a caller who
    supplies an invalid spinner gets an error that says which of the three
    constraint groups failed -- range, sum-to-one, or the tree-mode
    half-split -- and with what values.
    """
    if params.mode not in (GRID, TREE):
        raise ValueError(f"mode must be {GRID!r} or {TREE!r}, got {params.mode!r}")
    for name in ("c", "r", "t_c", "t_r"):
        value = getattr(params, name)
        # Comparisons (not float coercion) so exact Fraction parameters work.
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError(f"range: parameter {name}={value} is not finite")
        if not 0 <= value <= 1:
            raise ValueError(f"range: parameter {name}={value} is outside [0, 1]")
    total = params.c + params.r + params.t_c + params.t_r
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(
            f"sum-to-one: c + r + t_c + t_r = {total} differs from 1 "
            f"by more than {PROB_TOL}"
        )
    if params.mode == TREE:
        cop_half = params.c + params.t_c
        rob_half = params.r + params.t_r
        if abs(cop_half - 0.5) > PROB_TOL:
            raise ValueError(
                f"tree half-split: c + t_c = {cop_half} must equal 1/2"
            )
        if abs(rob_half - 0.5) > PROB_TOL:
            raise ValueError(
                f"tree half-split: r + t_r = {rob_half} must equal 1/2"
            )


def spin(params: GameParams, u: float) -> SpinnerOutcome:
    """Map one uniform draw u in [0,1) to a spinner outcome.

    The cumulative interval order (SoberCop, SoberRobber, TipsyCop,
    TipsyRobber) is fixed forever: identical seeds must replay identical
    games here and in any future reimplementation.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"spinner draw u={u} is outside [0, 1)")
    if u < params.c:
        return SpinnerOutcome.SOBER_COP
    if u < params.c + params.r:
        return SpinnerOutcome.SOBER_ROBBER
    if u < params.c + params.r + params.t_c:
        return SpinnerOutcome.TIPSY_COP
    return SpinnerOutcome.TIPSY_ROBBER


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible stream of uniforms.

    A stream is identified by (master_seed, stream_index); the same pair
    always yields the same sequence, independently of how many other streams
    exist or which thread consumes it.  Episode k of a batch uses stream
    index k, which is what makes batch results bit-identical under any
    parallelism.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError(
                f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        if int(self.stream_index) < 0:
            raise ValueError(f"stream_index must be >= 0, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of the stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))

    def uniforms(self, n: int) -> np.ndarray:
        """First n uniforms of the stream (mostly a testing convenience)."""
        return self.generator().random(n)
