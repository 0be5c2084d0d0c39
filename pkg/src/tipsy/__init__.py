"""Simulator and analytics for the tipsy cop-and-robber chase game.

Two players walk on a graph (the square lattice, or a tree of small trees
hung on a regular base tree); each round a four-way spinner decides who
moves and whether the move is deliberate or a drunken stumble.  The package
provides exact per-round law enumeration, closed-form regime classifiers,
a truncated-chain numerical oracle, and a reproducible Monte Carlo engine
with a command-line front end.
"""

from __future__ import annotations

from .analytics import (
    BOUNDARY_TOL,
    FoolishMargin,
    RegimeVerdict,
    WalkClass,
    WeightModel,
    Winner,
    base_tree_ceiling,
    crossover_t0,
    foolish_margin,
    gamblers_ruin_class,
    grid_regime,
    grid_weight_model,
    hitting_time_moments,
    mu,
    regular_tree_regime,
    rsb_margin,
    small_tree_ceiling,
    threshold_f,
    tree_regime,
)
from ._report import EpisodeReport
from .engine import (
    DEFAULT_EPISODES,
    DEFAULT_HORIZON,
    DEFAULT_PHASE_EPISODES,
    WILSON_Z,
    BatchSummary,
    MuEstimate,
    PhasePoint,
    TreeBatchStats,
    estimate_mu,
    run_batch,
    sweep_phase,
    wilson_interval,
)
from .grid import (
    ORIGIN,
    UNIT_MOVES,
    GridState,
    GridStepDistribution,
    GridStrategy,
    cs1,
    cs2,
    fold_state,
    folded_step_distribution,
    foolish_cop,
    rs,
    rs_min,
    run_grid_episode,
    sober_move,
    step_distribution,
    tipsy_move,
    two_round_expectation,
)
from .oracle import (
    KILLING,
    REFLECTING,
    OracleSolution,
    TruncatedChain,
    build_grid_chain,
    solve,
    stationary_distribution,
    wedge_states,
)
from .spinner import (
    GRID,
    PROB_TOL,
    TREE,
    GameParams,
    RngStream,
    SpinnerOutcome,
    spin,
    validate,
)
from .tree import (
    TreeEpisodeStats,
    TreeGameState,
    TreeParams,
    TreeStrategy,
    TreeVertex,
    base_step,
    cs,
    csb,
    distance,
    neighbors,
    project_to_base,
    reduce_state,
    rsa,
    rsb,
    run_tree_episode,
    sober_move_tree,
    start_on_base,
    summary_captured,
    summary_distance,
    summary_sober_move,
    summary_tipsy_move,
    tipsy_move_tree,
    validate_vertex,
)

__version__ = "0.1.0"

__all__ = [
    "BOUNDARY_TOL",
    "BatchSummary",
    "DEFAULT_EPISODES",
    "DEFAULT_HORIZON",
    "DEFAULT_PHASE_EPISODES",
    "EpisodeReport",
    "FoolishMargin",
    "GRID",
    "GameParams",
    "GridState",
    "GridStepDistribution",
    "GridStrategy",
    "KILLING",
    "MuEstimate",
    "ORIGIN",
    "OracleSolution",
    "PROB_TOL",
    "PhasePoint",
    "REFLECTING",
    "RegimeVerdict",
    "RngStream",
    "SpinnerOutcome",
    "TREE",
    "TreeBatchStats",
    "TreeEpisodeStats",
    "TreeGameState",
    "TreeParams",
    "TreeStrategy",
    "TreeVertex",
    "TruncatedChain",
    "UNIT_MOVES",
    "WILSON_Z",
    "WalkClass",
    "WeightModel",
    "Winner",
    "base_step",
    "base_tree_ceiling",
    "build_grid_chain",
    "crossover_t0",
    "cs",
    "cs1",
    "cs2",
    "csb",
    "distance",
    "estimate_mu",
    "fold_state",
    "folded_step_distribution",
    "foolish_cop",
    "foolish_margin",
    "gamblers_ruin_class",
    "grid_regime",
    "grid_weight_model",
    "hitting_time_moments",
    "mu",
    "neighbors",
    "project_to_base",
    "reduce_state",
    "regular_tree_regime",
    "rs",
    "rs_min",
    "rsa",
    "rsb",
    "rsb_margin",
    "run_batch",
    "run_grid_episode",
    "run_tree_episode",
    "small_tree_ceiling",
    "sober_move",
    "sober_move_tree",
    "solve",
    "spin",
    "start_on_base",
    "stationary_distribution",
    "step_distribution",
    "summary_captured",
    "summary_distance",
    "summary_sober_move",
    "summary_tipsy_move",
    "sweep_phase",
    "threshold_f",
    "tipsy_move",
    "tipsy_move_tree",
    "tree_regime",
    "two_round_expectation",
    "validate",
    "validate_vertex",
    "wedge_states",
    "wilson_interval",
]
