"""Monte Carlo engine: reproducible batches of episodes over worker threads.

Episode k of a batch always consumes RngStream(master_seed, k), and results
are merged by episode index, so a batch is bit-for-bit reproducible for a
given master seed no matter how many threads run it (including one).  The
per-episode work happens in compiled kernels that release the GIL; those
kernels replay exactly the trajectories of the pure-python reference runners,
which the test suite enforces.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import tree as tree_mod
from ._report import EpisodeReport
from .analytics import mu, tree_regime
from .grid import COP, ROBBER, GridState, GridStrategy
from .spinner import GRID, TREE, GameParams, RngStream, validate
from .tree import TreeEpisodeStats, TreeGameState, TreeParams, TreeStrategy

#: two-sided 95% normal quantile used for Wilson score intervals
WILSON_Z = 1.959963984540054

DEFAULT_HORIZON = 100_000
DEFAULT_EPISODES = 10_000
DEFAULT_PHASE_EPISODES = 1_000

_GRID_COP_CODES = {
    "CS1": _kernels.GRID_COP_CS1,
    "CS2": _kernels.GRID_COP_CS2,
    "FoolishCop": _kernels.GRID_COP_FOOLISH,
}
_GRID_ROBBER_CODES = {
    "RS": _kernels.GRID_ROBBER_RS,
    "RS_MIN": _kernels.GRID_ROBBER_RS_MIN,
}
_TREE_COP_CODES = {"CS": _kernels.TREE_COP_CS, "CSB": _kernels.TREE_COP_CSB}
_TREE_ROBBER_CODES = {"RSA": _kernels.TREE_ROBBER_RSA, "RSB": _kernels.TREE_ROBBER_RSB}


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple:
    """Wilson score confidence interval for a binomial fraction."""
    if trials <= 0:
        raise ValueError(f"need at least one trial, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside 0..{trials}")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    # At the degenerate counts the interval analytically touches 0 or 1;
    # reporting 1e-19-ish rounding residue instead would be noise.
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return (low, high)


@dataclass(frozen=True)
class TreeBatchStats:
    """Base-move bookkeeping pooled over every episode of a tree batch."""

    robber_base_moves: int
    cop_base_moves: int
    sum_gap: int
    sum_gap_sq: int
    mean_gap: float | None
    gap_standard_error: float | None
    mean_sign_robber: float | None
    mean_sign_cop: float | None
    mean_lower_robber: float | None
    mean_lower_cop: float | None
    domination_violations: int
    separated_mismatches: int
    total_drift: int
    max_cop_depth: int
    max_robber_depth: int


@dataclass(frozen=True, eq=False)
class BatchSummary:
    """Aggregate outcome of one batch.

    capture_times holds one entry per episode, -1 when the episode was
    censored at the horizon; capture_fraction_at() reads nested sub-horizon
    fractions off it, which is how plateau checks avoid re-running batches.
    """

    mode: str
    episodes: int
    horizon: int
    captures: int
    capture_fraction: float
    wilson_low: float
    wilson_high: float
    censored_fraction: float
    mean_capture_time: float | None
    median_capture_time: float | None
    capture_times: np.ndarray
    final_distances: np.ndarray
    tree: TreeBatchStats | None = None
    reports: tuple | None = None

    def capture_fraction_at(self, horizon: int) -> float:
        if not 0 <= horizon <= self.horizon:
            raise ValueError(f"sub-horizon {horizon} outside 0..{self.horizon}")
        hits = np.count_nonzero((self.capture_times >= 0) & (self.capture_times <= horizon))
        return float(hits) / self.episodes


def _float_params(params: GameParams) -> tuple:
    return float(params.c), float(params.r), float(params.t_c), float(params.t_r)


def _summarize(mode, episodes, horizon, capture_times, final_distances, tree_stats, reports):
    times = np.asarray(capture_times, dtype=np.int64)
    dists = np.asarray(final_distances, dtype=np.int64)
    captured = times[times >= 0]
    captures = int(captured.size)
    fraction = captures / episodes
    low, high = wilson_interval(captures, episodes)
    return BatchSummary(
        mode=mode,
        episodes=episodes,
        horizon=horizon,
        captures=captures,
        capture_fraction=fraction,
        wilson_low=low,
        wilson_high=high,
        censored_fraction=1.0 - fraction,
        mean_capture_time=float(np.mean(captured)) if captures else None,
        median_capture_time=float(np.median(captured)) if captures else None,
        capture_times=times,
        final_distances=dists,
        tree=tree_stats,
        reports=reports,
    )


def _pool_tree_records(records: np.ndarray) -> TreeBatchStats:
    K = _kernels
    robber_moves = int(records[:, K.REC_ROBBER_MOVES].sum())
    cop_moves = int(records[:, K.REC_COP_MOVES].sum())
    sum_gap = int(records[:, K.REC_SUM_GAP].sum())
    sum_gap_sq = int(records[:, K.REC_SUM_GAP_SQ].sum())
    mean_gap = gap_se = None
    if robber_moves:
        mean_gap = sum_gap / robber_moves
        variance = max(0.0, sum_gap_sq / robber_moves - mean_gap * mean_gap)
        gap_se = math.sqrt(variance / robber_moves)
    return TreeBatchStats(
        robber_base_moves=robber_moves,
        cop_base_moves=cop_moves,
        sum_gap=sum_gap,
        sum_gap_sq=sum_gap_sq,
        mean_gap=mean_gap,
        gap_standard_error=gap_se,
        mean_sign_robber=(int(records[:, K.REC_SUM_SIGN_R].sum()) / robber_moves)
        if robber_moves else None,
        mean_sign_cop=(int(records[:, K.REC_SUM_SIGN_C].sum()) / cop_moves)
        if cop_moves else None,
        mean_lower_robber=(int(records[:, K.REC_SUM_LOWER_R].sum()) / robber_moves)
        if robber_moves else None,
        mean_lower_cop=(int(records[:, K.REC_SUM_LOWER_C].sum()) / cop_moves)
        if cop_moves else None,
        domination_violations=int(records[:, K.REC_DOMINATION].sum()),
        separated_mismatches=int(records[:, K.REC_SEPARATED].sum()),
        total_drift=int(records[:, K.REC_DRIFT].sum()),
        max_cop_depth=int(records[:, K.REC_MAX_A].max()) if records.size else 0,
        max_robber_depth=int(records[:, K.REC_MAX_B].max()) if records.size else 0,
    )


def _tree_stats_from_record(rec: np.ndarray) -> TreeEpisodeStats:
    K = _kernels
    return TreeEpisodeStats(
        robber_base_moves=int(rec[K.REC_ROBBER_MOVES]),
        cop_base_moves=int(rec[K.REC_COP_MOVES]),
        sum_sign_robber=int(rec[K.REC_SUM_SIGN_R]),
        sum_sign_cop=int(rec[K.REC_SUM_SIGN_C]),
        sum_lower_robber=int(rec[K.REC_SUM_LOWER_R]),
        sum_lower_cop=int(rec[K.REC_SUM_LOWER_C]),
        domination_violations=int(rec[K.REC_DOMINATION]),
        separated_mismatches=int(rec[K.REC_SEPARATED]),
        last_robber_move_round=int(rec[K.REC_LAST_ROBBER_MOVE]),
        completed_gaps=int(rec[K.REC_ROBBER_MOVES]),
        sum_gap=int(rec[K.REC_SUM_GAP]),
        sum_gap_sq=int(rec[K.REC_SUM_GAP_SQ]),
        max_cop_depth=int(rec[K.REC_MAX_A]),
        max_robber_depth=int(rec[K.REC_MAX_B]),
        sum_cop_depth=int(rec[K.REC_SUM_A]),
        sum_robber_depth=int(rec[K.REC_SUM_B]),
        drift=int(rec[K.REC_DRIFT]),
    )


def _run_indexed(worker, episodes: int, threads: int | None):
    if threads is not None and threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads == 1:
        return [worker(k) for k in range(episodes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(episodes)))


def run_batch(
    params: GameParams,
    cop_strategy,
    robber_strategy,
    *,
    episodes: int,
    horizon: int = DEFAULT_HORIZON,
    master_seed: int,
    start=None,
    tree: TreeParams | None = None,
    threads: int | None = None,
    keep_reports: bool = False,
) -> BatchSummary:
    """Simulate `episodes` independent episodes and summarize them.

    Grid batches take GridStrategy pairs and an optional GridState start
    (default (0, 1)).  Tree batches additionally need `tree` and take
    TreeStrategy pairs with an optional TreeGameState start (default: both
    players on the base tree, 20 apart).
    """
    validate(params)
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    c, r, t_c, t_r = _float_params(params)

    if params.mode == GRID:
        if tree is not None:
            raise ValueError("tree parameters make no sense for a grid batch")
        if not isinstance(cop_strategy, GridStrategy) or cop_strategy.side != COP:
            raise ValueError("grid batch needs a grid cop strategy")
        if not isinstance(robber_strategy, GridStrategy) or robber_strategy.side != ROBBER:
            raise ValueError("grid batch needs a grid robber strategy")
        start_state = GridState(0, 1) if start is None else GridState(*start)
        if start_state == GridState(0, 0):
            raise ValueError("start state is already captured")
        cop_code = _GRID_COP_CODES[cop_strategy.kind]
        robber_code = _GRID_ROBBER_CODES[robber_strategy.kind]
        cop_p = float(cop_strategy.p) if cop_strategy.p is not None else 0.0

        def worker(k: int):
            gen = RngStream(master_seed, k).generator()
            return _kernels.grid_episode_kernel(
                c, r, t_c, cop_code, cop_p, robber_code,
                start_state.x, start_state.y, horizon, gen,
            )

        rows = _run_indexed(worker, episodes, threads)
        capture_times = [(t if cap else -1) for cap, t, _, _, _ in rows]
        final_distances = [abs(x) + abs(y) for _, _, _, x, y in rows]
        reports = None
        if keep_reports:
            reports = tuple(
                EpisodeReport(
                    captured=bool(cap),
                    capture_time=t if cap else None,
                    steps_run=steps,
                    final_distance=abs(x) + abs(y),
                )
                for cap, t, steps, x, y in rows
            )
        return _summarize(GRID, episodes, horizon, capture_times, final_distances,
                          None, reports)

    if tree is None:
        raise ValueError("tree batches need TreeParams")
    if not isinstance(cop_strategy, TreeStrategy) or cop_strategy.side != COP:
        raise ValueError("tree batch needs a tree cop strategy")
    if not isinstance(robber_strategy, TreeStrategy) or robber_strategy.side != ROBBER:
        raise ValueError("tree batch needs a tree robber strategy")
    if start is None:
        start = tree_mod.start_on_base(20)
    tree_mod.validate_vertex(tree, start.cop)
    tree_mod.validate_vertex(tree, start.robber)
    if start.captured:
        raise ValueError("start state is already captured")
    gap0, a0, b0, l0 = tree_mod.reduce_state(start)
    cop_code = _TREE_COP_CODES[cop_strategy.kind]
    robber_code = _TREE_ROBBER_CODES[robber_strategy.kind]

    def worker(k: int):
        gen = RngStream(master_seed, k).generator()
        return _kernels.tree_episode_kernel(
            c, r, t_c, cop_code, robber_code, tree.Delta, tree.delta,
            gap0, a0, b0, l0, horizon, gen,
        )

    records = np.stack(_run_indexed(worker, episodes, threads))
    K = _kernels
    capture_times = np.where(records[:, K.REC_CAPTURED] == 1,
                             records[:, K.REC_CAPTURE_TIME], -1)
    final_distances = np.array(
        [
            tree_mod.summary_distance(
                (int(rec[K.REC_GAP]), int(rec[K.REC_A]), int(rec[K.REC_B]),
                 int(rec[K.REC_SHARED]))
            )
            for rec in records
        ],
        dtype=np.int64,
    )
    reports = None
    if keep_reports:
        reports = tuple(
            EpisodeReport(
                captured=bool(rec[K.REC_CAPTURED]),
                capture_time=int(rec[K.REC_CAPTURE_TIME]) if rec[K.REC_CAPTURED] else None,
                steps_run=int(rec[K.REC_STEPS]),
                final_distance=int(dist),
                tree_stats=_tree_stats_from_record(rec),
            )
            for rec, dist in zip(records, final_distances)
        )
    return _summarize(TREE, episodes, horizon, capture_times, final_distances,
                      _pool_tree_records(records), reports)


@dataclass(frozen=True)
class MuEstimate:
    """Pooled mean spacing between robber base moves, with its standard error."""

    mean_gap: float
    standard_error: float
    gaps: int
    episodes: int


def estimate_mu(
    tree: TreeParams,
    t: float,
    *,
    episodes: int = 10,
    horizon: int = DEFAULT_HORIZON,
    master_seed: int,
    start_separation: int = 60,
    threads: int | None = None,
) -> MuEstimate:
    """Measure the robber's base-move renewal spacing under the base-seeking pair.

    Runs the base-seeking robber against the base-seeking cop at equal
    tipsiness t (so the game parameters stay admissible), starting far apart
    so captures do not truncate the renewal stream, and pools every completed
    spacing across episodes.
    """
    mu(t, tree.delta, tree.Delta)  # raises for supercritical tipsiness
    params = GameParams(c=0.5 - t, r=0.5 - t, t_c=t, t_r=t, mode=TREE)
    batch = run_batch(
        params, tree_mod.csb(), tree_mod.rsb(),
        episodes=episodes, horizon=horizon, master_seed=master_seed,
        start=tree_mod.start_on_base(start_separation), tree=tree, threads=threads,
    )
    stats = batch.tree
    if not stats.robber_base_moves:
        raise RuntimeError("no robber base moves were recorded; horizon too short")
    return MuEstimate(
        mean_gap=stats.mean_gap,
        standard_error=stats.gap_standard_error,
        gaps=stats.robber_base_moves,
        episodes=episodes,
    )


@dataclass(frozen=True)
class PhasePoint:
    """One cell of a tree phase sweep: analytic verdicts and observed fractions.

    The observed verdicts are interval classifications, not point estimates:
    a cell reads "CopAS" only when its whole Wilson interval clears the
    capture threshold, "RobberPositiveProb" only when the interval stays
    below it, and "Boundary" when the interval straddles the threshold --
    finite batches cannot certify the almost-sure dichotomy pointwise.
    """

    t_r: float
    t_c: float
    analytic_rsa: str
    analytic_rsb: str
    observed_capture_rsa: float
    observed_capture_rsb: float
    observed_rsa: str = ""
    observed_rsb: str = ""
    error: str | None = None


def _classify_interval(low: float, high: float, threshold: float) -> str:
    if low > threshold:
        return "CopAS"
    if high < threshold:
        return "RobberPositiveProb"
    return "Boundary"


def sweep_phase(
    tree: TreeParams,
    t_r_values,
    t_c_values,
    *,
    episodes: int = DEFAULT_PHASE_EPISODES,
    horizon: int = DEFAULT_HORIZON,
    master_seed: int,
    start_separation: int = 20,
    threads: int | None = None,
    capture_threshold: float = 0.5,
) -> list:
    """Cross analytic regime verdicts with observed capture fractions.

    For every (t_r, t_c) pair, plays the copy-diving robber against the
    pursuit cop and the base-seeking robber against the base-pursuit cop.
    Points whose parameters are inadmissible (or whose analytics raise) are
    returned with an error note instead of aborting the sweep; each point
    derives its own child seed from master_seed so results do not depend on
    sweep order.
    """
    points = []
    start = tree_mod.start_on_base(start_separation)
    t_r_list = [float(v) for v in t_r_values]
    t_c_list = [float(v) for v in t_c_values]
    for i, t_r in enumerate(t_r_list):
        for j, t_c in enumerate(t_c_list):
            point_seed = master_seed + 1_000_003 * (i * len(t_c_list) + j)
            try:
                rsa_verdict, rsb_verdict = tree_regime(t_r, t_c, tree.delta, tree.Delta)
                params = GameParams(c=0.5 - t_c, r=0.5 - t_r, t_c=t_c, t_r=t_r, mode=TREE)
                rsa_batch = run_batch(
                    params, tree_mod.cs(), tree_mod.rsa(),
                    episodes=episodes, horizon=horizon, master_seed=point_seed,
                    start=start, tree=tree, threads=threads,
                )
                rsb_batch = run_batch(
                    params, tree_mod.csb(), tree_mod.rsb(),
                    episodes=episodes, horizon=horizon, master_seed=point_seed + 1,
                    start=start, tree=tree, threads=threads,
                )
            except (ValueError, ArithmeticError) as exc:
                points.append(PhasePoint(
                    t_r=float(t_r), t_c=float(t_c),
                    analytic_rsa="", analytic_rsb="",
                    observed_capture_rsa=float("nan"),
                    observed_capture_rsb=float("nan"),
                    error=str(exc),
                ))
                continue
            points.append(PhasePoint(
                t_r=float(t_r), t_c=float(t_c),
                analytic_rsa=rsa_verdict.winner.value,
                analytic_rsb=rsb_verdict.winner.value,
                observed_capture_rsa=rsa_batch.capture_fraction,
                observed_capture_rsb=rsb_batch.capture_fraction,
                observed_rsa=_classify_interval(
                    rsa_batch.wilson_low, rsa_batch.wilson_high, capture_threshold),
                observed_rsb=_classify_interval(
                    rsb_batch.wilson_low, rsb_batch.wilson_high, capture_threshold),
            ))
    return points
