"""Finite-truncation ground truth for capture probabilities and times.

Builds explicit Markov chains on the folded wedge (states (x, y) with
y >= |x| and y <= radius) whose rows come from the exact one-round law in
`grid`, then solves the absorbing-chain linear systems by plain fixed-point
iteration with sparse matrix-vector products.  Everything here is an
independent check on the Monte Carlo engine: same game law, no randomness.

Two boundary policies:

* "killing"    -- any move past the radius absorbs as escaped.  Absorption
                  probabilities lower-bound the infinite-lattice capture
                  probability and increase with radius.
* "reflecting" -- any move past the radius is replaced by staying put.  The
                  walk then captures with probability one, and expected
                  capture times approximate the infinite-lattice times from
                  below in the positive-recurrent regime.

The reflecting self-loop keeps the one-round denominators untouched, which
preserves detailed balance for the reversible pursuit pairing: the truncated
chain's stationary law stays exactly proportional to the vertex weight sums
of `analytics.grid_weight_model`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import ORIGIN, GridState, GridStrategy, fold_state, folded_step_distribution
from .spinner import GameParams, PROB_TOL

#: Absorbing-state labels used in transition rows.
CAPTURE = "capture"
ESCAPED = "escaped"

#: Boundary policies.
KILLING = "killing"
REFLECTING = "reflecting"

#: Fixed-point iteration control.
RESIDUAL_TOL = 1e-12
MAX_SWEEPS = 2_000_000


def wedge_states(radius: int) -> list[GridState]:
    """All folded states with 1 <= y <= radius, ordered row by row."""
    return [
        GridState(x, y) for y in range(1, radius + 1) for x in range(-y, y + 1)
    ]


@dataclass(frozen=True, eq=False)
class TruncatedChain:
    """Sparse row-stochastic chain over transient labels plus absorbers.

    matrix is the transient-to-transient block Q; capture_mass and
    escape_mass are the per-state one-step probabilities of absorbing.
    Row stochasticity (Q row sum + capture + escape == 1) is enforced at
    construction.
    """

    states: tuple
    matrix: sp.csr_matrix
    capture_mass: np.ndarray
    escape_mass: np.ndarray
    boundary: str

    @classmethod
    def from_rows(cls, rows: dict, boundary: str) -> "TruncatedChain":
        """Assemble a chain from {state: {target: prob}} rows.

        Targets may be other row states or the CAPTURE / ESCAPED labels.
        Raises if any probability is negative, a row fails to sum to one,
        or a target is neither absorbing nor a row state.
        """
        if boundary not in (KILLING, REFLECTING):
            raise ValueError(f"boundary must be 'killing' or 'reflecting', got {boundary!r}")
        states = tuple(rows)
        index = {s: i for i, s in enumerate(states)}
        n = len(states)
        capture = np.zeros(n)
        escape = np.zeros(n)
        builder = sp.lil_matrix((n, n))
        for i, (state, row) in enumerate(rows.items()):
            total = 0.0
            for target, prob in row.items():
                prob = float(prob)
                if prob < -PROB_TOL:
                    raise ValueError(f"negative probability {prob} at {state} -> {target}")
                total += prob
                if target == CAPTURE:
                    capture[i] += prob
                elif target == ESCAPED:
                    escape[i] += prob
                elif target in index:
                    builder[i, index[target]] += prob
                else:
                    raise ValueError(f"row {state} targets unknown state {target}")
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"row {state} sums to {total}, not 1")
        return cls(
            states=states,
            matrix=builder.tocsr(),
            capture_mass=capture,
            escape_mass=escape,
            boundary=boundary,
        )

    def index_of(self, state) -> int:
        return self.states.index(state)


def build_grid_chain(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    radius: int,
    boundary: str,
) -> TruncatedChain:
    """Truncated folded difference walk with the chosen boundary policy.

    Every row is the folded one-round law (the same code path the exact-law
    tests exercise); the only edits are at the rim, where moves past the
    radius either absorb as escaped or turn into self-loops.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    rows: dict[GridState, dict] = {}
    for state in wedge_states(radius):
        law = folded_step_distribution(params, cop_strategy, robber_strategy, state)
        row: dict = {}
        for target, prob in law.items():
            if target == ORIGIN:
                key = CAPTURE
            elif target.y > radius:
                key = ESCAPED if boundary == KILLING else state
            else:
                key = target
            row[key] = row.get(key, 0.0) + prob
        rows[state] = row
    return TruncatedChain.from_rows(rows, boundary)


@dataclass(frozen=True, eq=False)
class OracleSolution:
    """Absorption probabilities and capture times for one truncated chain.

    capture_probability[s] is the chance the walk started at s reaches the
    capture state before escaping (before anything, under killing; certain
    under reflecting).  conditional_time[s] is the expected number of rounds
    to capture given that capture happens.
    """

    boundary: str
    capture_probability: dict
    conditional_time: dict
    sweeps: int
    residual: float


def _fixed_point(matrix: sp.csr_matrix, inhom: np.ndarray, label: str) -> tuple[np.ndarray, int]:
    """Iterate x <- Q x + b from zero until the sup-norm residual is tiny.

    The iterates increase monotonically to the minimal non-negative solution,
    which for absorbing-chain systems is the probabilistically meaningful
    one.  Raises if the contraction is too weak to converge in MAX_SWEEPS.
    """
    x = np.zeros_like(inhom)
    for sweep in range(1, MAX_SWEEPS + 1):
        nxt = matrix.dot(x) + inhom
        residual = float(np.max(np.abs(nxt - x)))
        x = nxt
        # relative residual: expected times can be large enough that a fixed
        # absolute 1e-12 would sit below float64 resolution
        if residual < RESIDUAL_TOL * max(1.0, float(np.max(np.abs(x)))):
            return x, sweep
    raise ArithmeticError(
        f"{label}: fixed-point iteration still above {RESIDUAL_TOL} after {MAX_SWEEPS} sweeps"
    )


def solve(chain: TruncatedChain) -> OracleSolution:
    """Capture probabilities and conditional expected capture times.

    h = Q h + b_capture gives absorption-at-capture probabilities; the
    companion system g = Q g + h gives g(s) = E[time * 1(captured)], so the
    conditional time is g/h wherever h is positive.
    """
    h, sweeps_h = _fixed_point(chain.matrix, chain.capture_mass, "capture probability")
    g, sweeps_g = _fixed_point(chain.matrix, h, "capture time")
    residual = float(
        np.max(np.abs(chain.matrix.dot(h) + chain.capture_mass - h))
    )
    times = {}
    probs = {}
    for i, state in enumerate(chain.states):
        probs[state] = float(h[i])
        times[state] = float(g[i] / h[i]) if h[i] > 0 else float("inf")
    return OracleSolution(
        boundary=chain.boundary,
        capture_probability=probs,
        conditional_time=times,
        sweeps=sweeps_h + sweeps_g,
        residual=residual,
    )


def stationary_distribution(
    params: GameParams,
    cop_strategy: GridStrategy,
    robber_strategy: GridStrategy,
    radius: int,
) -> dict[GridState, float]:
    """Stationary law of the reflecting walk with the capture state rewired.

    Instead of absorbing, the origin moves to (0, 1) with probability one --
    its single folded edge -- so the chain is irreducible on the truncated
    wedge plus origin.  Computed by lazy power iteration ((P + I)/2 kills
    periodicity) to a 1e-12 sup-norm residual.  For the reversible pursuit
    pairing the result is proportional to the vertex weight sums.
    """
    states: list = [ORIGIN] + wedge_states(radius)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    builder = sp.lil_matrix((n, n))
    builder[0, index[GridState(0, 1)]] = 1.0
    for state in states[1:]:
        i = index[state]
        law = folded_step_distribution(params, cop_strategy, robber_strategy, state)
        for target, prob in law.items():
            j = i if target.y > radius else index[target]
            builder[i, j] += float(prob)
    transition = builder.tocsr()

    pi = np.full(n, 1.0 / n)
    for sweep in range(1, MAX_SWEEPS + 1):
        nxt = 0.5 * (transition.T.dot(pi) + pi)
        nxt /= nxt.sum()
        residual = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if residual < RESIDUAL_TOL:
            break
    else:
        raise ArithmeticError(
            f"stationary iteration still above {RESIDUAL_TOL} after {MAX_SWEEPS} sweeps"
        )
    return {state: float(pi[index[state]]) for state in states}
