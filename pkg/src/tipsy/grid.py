"""Cop-and-robber chase on the integer lattice, in difference coordinates.

The only thing that matters for capture is the offset D = robber - cop, so
states here are single lattice points and capture is D == (0, 0).  A sober
robber move shifts D away from the origin, a sober cop move shifts it toward
the origin, and either player's tipsy stumble shifts D by a uniformly random
unit vector.

Strategies act on whichever coordinate has the larger (or, for the foolish
cop, smaller) absolute value.  Diagonal ties |x| == |y| are broken by fixed
rules so that runs are reproducible:

* RS and CS1 act on the y coordinate;
* CS2(p) acts as CS1 with probability p, otherwise pushes y away from zero;
* FoolishCop decrements x toward zero.

The quarter-plane fold used by reporting and by the truncated-chain oracle
identifies states under the symmetry subgroup {identity, swap, negate-both,
anti-swap}, whose fundamental wedge is {y >= |x|}.  `fold_state` and
`folded_step_distribution` push states and one-round laws through that map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from ._report import EpisodeReport
from .spinner import (
    GRID,
    GameParams,
    RngStream,
    SpinnerOutcome,
    spin,
    validate,
)


class GridState(NamedTuple):
    """Robber-minus-cop offset."""

    x: int
    y: int


ORIGIN = GridState(0, 0)

# Unit moves in a fixed order; a tipsy draw u picks entry floor(4u).  The
# robber adds the vector to D, the cop subtracts it.  This table is part of
# the seed-reproducibility contract (the fast kernels replicate it).
UNIT_MOVES = (GridState(1, 0), GridState(-1, 0), GridState(0, 1), GridState(0, -1))

COP = "cop"
ROBBER = "robber"

_COP_KINDS = ("CS1", "CS2", "FoolishCop")
_ROBBER_KINDS = ("RS", "RS_MIN")


@dataclass(frozen=True)
class GridStrategy:
    """A named deterministic (or, for CS2, nearly deterministic) policy.

    kind -- "RS" (robber pushes the larger coordinate away from zero),
            "RS_MIN" (robber pushes the smaller coordinate away; a
            representative alternate fleeing rule for experiments),
            "CS1" (cop pulls the larger coordinate toward zero),
            "CS2" (CS1 off the diagonal; on it, CS1 with probability p, else
            push y away from zero),
            "FoolishCop" (cop pulls the smaller nonzero coordinate toward
            zero, falling back to the larger when the smaller is zero).
    side -- "cop" or "robber"; implied by the kind and checked.
    p    -- mixing probability, CS2 only.
    """

    kind: str
    side: str
    p: float | None = None

    def __post_init__(self) -> None:
        if self.kind in _COP_KINDS:
            expected = COP
        elif self.kind in _ROBBER_KINDS:
            expected = ROBBER
        else:
            raise ValueError(f"unknown grid strategy kind {self.kind!r}")
        if self.side != expected:
            raise ValueError(f"{self.kind} is a {expected} strategy, not {self.side}")
        if self.kind == "CS2":
            if self.p is None or not 0 <= self.p <= 1:
                raise ValueError(f"CS2 needs a mixing probability in [0,1], got {self.p}")
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no mixing probability")


def rs() -> GridStrategy:
    return GridStrategy("RS", ROBBER)


def rs_min() -> GridStrategy:
    return GridStrategy("RS_MIN", ROBBER)


def cs1() -> GridStrategy:
    return GridStrategy("CS1", COP)


def cs2(p: float) -> GridStrategy:
    return GridStrategy("CS2", COP, p)


def foolish_cop() -> GridStrategy:
    return GridStrategy("FoolishCop", COP)


def _sign(v: int) -> int:
    return 1 if v > 0 else (-1 if v < 0 else 0)


def _require_not_origin(state: GridState) -> None:
    if state.x == 0 and state.y == 0:
        raise ValueError("no move is defined at (0, 0): the game is already over")


def sober_move(strategy: GridStrategy, state: GridState, u: float) -> GridState:
    """Apply one deliberate move to the offset D.

    The draw u is consumed only by CS2 on the diagonal; every other policy is
    deterministic and ignores it (the engine still burns one uniform per move
    so that draw positions never depend on the strategy).
    """
    state = GridState(*state)
    _require_not_origin(state)
    x, y = state
    ax, ay = abs(x), abs(y)
    kind = strategy.kind

    if kind == "RS":
        # Push the larger coordinate away from zero; diagonal acts on y.
        if ax > ay:
            return GridState(x + _sign(x), y)
        return GridState(x, y + _sign(y))

    if kind == "RS_MIN":
        # Push the smaller coordinate away from zero.  A zero coordinate
        # moves in the +1 direction; diagonal acts on x.
        if ay < ax:
            return GridState(x, y + (_sign(y) or 1))
        return GridState(x + (_sign(x) or 1), y)

    if kind == "CS1":
        if ax > ay:
            return GridState(x - _sign(x), y)
        return GridState(x, y - _sign(y))

    if kind == "CS2":
        if ax != ay:  # off the diagonal CS2 is exactly CS1
            if ax > ay:
                return GridState(x - _sign(x), y)
            return GridState(x, y - _sign(y))
        if u < strategy.p:
            return GridState(x, y - _sign(y))
        return GridState(x, y + _sign(y))

    if kind == "FoolishCop":
        if ax == ay:  # diagonal: per the fixed tie rule, shrink x
            return GridState(x - _sign(x), y)
        if ax < ay:  # x is the smaller coordinate
            if x != 0:
                return GridState(x - _sign(x), y)
            return GridState(x, y - _sign(y))  # smaller is zero: shrink larger
        if y != 0:  # y is the smaller coordinate
            return GridState(x, y - _sign(y))
        return GridState(x - _sign(x), y)

    raise ValueError(f"unknown grid strategy kind {kind!r}")


def tipsy_move(state: GridState, mover: str, u: float) -> GridState:
    """Stumble to a uniform random neighbor (in difference coordinates).

    The robber adds UNIT_MOVES[floor(4u)] to D, the cop subtracts it.  Both
    induce the same uniform law on D; the signed convention is fixed so every
    implementation replays identical trajectories from identical draws.
    """
    state = GridState(*state)
    _require_not_origin(state)
    if not 0.0 <= u < 1.0:
        raise ValueError(f"move draw u={u} is outside [0, 1)")
    d = UNIT_MOVES[int(u * 4)]
    if mover == ROBBER:
        return GridState(state.x + d.x, state.y + d.y)
    if mover == COP:
        return GridState(state.x - d.x, state.y - d.y)
    raise ValueError(f"mover must be 'cop' or 'robber', got {mover!r}")


@dataclass(frozen=True)
class GridStepDistribution:
    """One-round law of D as probabilities of the four unit displacements."""

    right: float  # D += (1, 0)
    left: float   # D += (-1, 0)
    up: float     # D += (0, 1)
    down: float   # D += (0, -1)

    def as_dict(self) -> dict[GridState, float]:
        return {
            GridState(1, 0): self.right,
            GridState(-1, 0): self.left,
            GridState(0, 1): self.up,
            GridState(0, -1): self.down,
        }

    def total(self) -> float:
        return self.right + self.left + self.up + self.down


def _accumulate_sober(masses: dict[GridState, float], strategy, state, weight) -> None:
    """Add the sober-move law of one strategy, weighted, into `masses`."""
    x, y = state
    if strategy.kind == "CS2" and abs(x) == abs(y):
        toward = GridState(x, y - _sign(y))
        away = GridState(x, y + _sign(y))
        masses[toward] = masses.get(toward, 0) + weight * strategy.p
        masses[away] = masses.get(away, 0) + weight * (1 - strategy.p)
        return
    target = sober_move(strategy, state, 0.0)
    masses[target] = masses.get(target, 0) + weight


def step_distribution(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    state: GridState,
) -> GridStepDistribution:
    """Exact one-round law of the offset D from `state`.

    Works in whatever scalar type the parameters carry (floats or exact
    fractions).  Raises at the origin, where no round can be played.
    """
    state = GridState(*state)
    _require_not_origin(state)
    validate(params)
    if cop_strategy.side != COP or robber_strategy.side != ROBBER:
        raise ValueError("step_distribution needs one cop and one robber strategy")

    masses: dict[GridState, float] = {}
    _accumulate_sober(masses, cop_strategy, state, params.c)
    _accumulate_sober(masses, robber_strategy, state, params.r)
    quarter = (params.t_c + params.t_r) / 4
    for d in UNIT_MOVES:
        target = GridState(state.x + d.x, state.y + d.y)
        masses[target] = masses.get(target, 0) + quarter

    def mass_at(dx: int, dy: int):
        return masses.get(GridState(state.x + dx, state.y + dy), 0)

    return GridStepDistribution(
        right=mass_at(1, 0), left=mass_at(-1, 0), up=mass_at(0, 1), down=mass_at(0, -1)
    )


# --- quarter-plane fold ------------------------------------------------------

def fold_state(state: GridState) -> GridState:
    """Canonical representative of `state` in the wedge {y >= |x|}.

    The identification subgroup is {id, swap, negate-both, anti-swap}; each
    orbit meets the wedge in exactly one point (diagonal points are fixed by
    one nontrivial element, which is why the branch order below is safe).
    """
    x, y = state
    if y >= abs(x):
        return GridState(x, y)
    if x >= abs(y):
        return GridState(y, x)
    if -y >= abs(x):
        return GridState(-x, -y)
    return GridState(-y, -x)


def folded_step_distribution(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    state: GridState,
) -> dict[GridState, float]:
    """One-round law on wedge states: the unfolded law pushed through the fold.

    `state` must already be a wedge representative.  This is the single code
    path the oracle builds its transition rows from, so oracle chains can
    never drift out of sync with the simulated dynamics.
    """
    state = GridState(*state)
    if state != fold_state(state):
        raise ValueError(f"{state} is not a wedge representative (need y >= |x|)")
    law = step_distribution(params, cop_strategy, robber_strategy, state)
    out: dict[GridState, float] = {}
    for move, prob in law.as_dict().items():
        if prob == 0:
            continue
        target = fold_state(GridState(state.x + move.x, state.y + move.y))
        out[target] = out.get(target, 0) + prob
    return out


# --- episode runner (pure-python reference) ----------------------------------

def run_grid_episode(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    start: GridState,
    horizon: int,
    rng: RngStream,
) -> EpisodeReport:
    """Play one episode and report the outcome.

    Reference implementation: a readable loop consuming exactly two uniforms
    per round (spinner, then move) from the stream.  The Monte Carlo engine
    runs a compiled kernel that replays the identical trajectory for the same
    stream; equality of the two paths is enforced by tests.
    """
    validate(params)
    if params.mode != GRID:
        raise ValueError(f"grid episode needs mode='grid' params, got {params.mode!r}")
    state = GridState(*start)
    _require_not_origin(state)
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")

    gen = rng.generator()
    for step in range(1, horizon + 1):
        u1 = gen.random()
        u2 = gen.random()
        outcome = spin(params, u1)
        if outcome is SpinnerOutcome.SOBER_COP:
            state = sober_move(cop_strategy, state, u2)
        elif outcome is SpinnerOutcome.SOBER_ROBBER:
            state = sober_move(robber_strategy, state, u2)
        elif outcome is SpinnerOutcome.TIPSY_COP:
            state = tipsy_move(state, COP, u2)
        else:
            state = tipsy_move(state, ROBBER, u2)
        if state == ORIGIN:
            return EpisodeReport(
                captured=True, capture_time=step, steps_run=step, final_distance=0
            )
    return EpisodeReport(
        captured=False,
        capture_time=None,
        steps_run=horizon,
        final_distance=abs(state.x) + abs(state.y),
    )


# --- exact two-round drift ----------------------------------------------------

def two_round_expectation(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    state: GridState,
):
    """Expected change of max(|x|, |y|) over two rounds, by exact enumeration.

    Enumerates every (outcome, move) branch of two consecutive rounds and
    weights the change of the larger coordinate magnitude.  If a first-round
    move captures (reaches the origin), the episode stops there and the
    second round contributes nothing.  With Fraction-valued parameters the
    result is an exact rational; with floats the enumeration is exact up to
    a few ulp (far below 1e-12).
    """
    state = GridState(*state)
    _require_not_origin(state)

    def norm(s: GridState) -> int:
        return max(abs(s.x), abs(s.y))

    def one_round(s: GridState):
        law = step_distribution(params, cop_strategy, robber_strategy, s)
        return [
            (GridState(s.x + m.x, s.y + m.y), p)
            for m, p in law.as_dict().items()
            if p != 0
        ]

    expectation = 0
    for mid, p1 in one_round(state):
        if mid == ORIGIN:
            expectation += p1 * (0 - norm(state))
            continue
        for end, p2 in one_round(mid):
            expectation += p1 * p2 * (norm(end) - norm(state))
    return expectation
