"""Command-line front door for simulations, phase sweeps, analytics, and oracles.

Output contract: JSON documents echo the parsed configuration and carry every
numeric as {"value": ..., "source": ...}, where source is "mc" for Monte
Carlo estimates, "oracle" for truncated-chain solves, and "analytic:<name>"
for closed forms (the name identifies the derivation family, e.g.
"analytic:base-return-time").  CSV is used for per-episode tables and phase
sweeps.  With --deterministic the output is a pure function of the flags: the
timestamp and host fields are suppressed.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from fractions import Fraction

import numpy as np

from . import analytics, engine, grid as grid_mod, oracle as oracle_mod, tree as tree_mod
from .spinner import GRID, TREE, GameParams, RngStream, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SEED_ENV_VAR = "TIPSY_SEED"

# provenance tags for the analytic closed forms, named by derivation family
TAG_WEIGHTS = "analytic:weight-sum-recurrence"
TAG_TWO_ROUND = "analytic:two-round-drift"
TAG_REGIME = "analytic:drift-comparison"
TAG_MU = "analytic:base-return-time"
TAG_MARGIN = "analytic:drift-margin"
TAG_REGULAR_TREE = "analytic:regular-tree-ruin"
TAG_DOMINANCE = "analytic:strategy-dominance"


def parse_probability(text: str) -> Fraction:
    """Parse a probability given as a decimal ("0.3") or a fraction ("3/10")."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a number or p/q fraction")
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"probability {text} outside [0, 1]")
    return value


def parse_probability_list(text: str) -> list:
    return [parse_probability(part.strip()) for part in text.split(",") if part.strip()]


def parse_radius_list(text: str) -> list:
    try:
        radii = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list")
    if not radii or any(r < 1 for r in radii):
        raise argparse.ArgumentTypeError("radii must be positive integers")
    return radii


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "").strip()
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"{SEED_ENV_VAR}={raw!r} is not an integer seed"
            )
    return 0


def tagged(value, source: str):
    if value is None:
        return {"value": None, "source": source}
    if isinstance(value, float) and math.isnan(value):
        return {"value": None, "source": source}
    return {"value": value, "source": source}


def analytic_or_error(source: str, fn, *args, **kwargs):
    """Evaluate one closed form, embedding failures instead of raising."""
    try:
        return tagged(fn(*args, **kwargs), source)
    except (ValueError, ArithmeticError) as exc:
        return {"error": str(exc), "source": source}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tipsy",
        description="Simulator and analytics for the tipsy cop-and-robber chase.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (must not change results)")
        p.add_argument("--output", default=None, help="output file (default stdout)")
        p.add_argument("--deterministic", action="store_true",
                       help="suppress timestamp/host fields for golden-file diffs")

    def add_game_params(p, tree_too=True):
        p.add_argument("--game", choices=[GRID, TREE], required=True)
        p.add_argument("--c", type=parse_probability, help="sober-cop probability")
        p.add_argument("--r", type=parse_probability, help="sober-robber probability")
        p.add_argument("--tc", type=parse_probability, help="tipsy-cop probability")
        p.add_argument("--tr", type=parse_probability, help="tipsy-robber probability")
        if tree_too:
            p.add_argument("--Delta", type=int, help="base-tree degree (tree game)")
            p.add_argument("--delta", type=int, help="copy degree (tree game)")

    sim = sub.add_parser("simulate", help="run a batch of episodes")
    add_game_params(sim)
    sim.add_argument("--cop", required=True,
                     help="cop strategy: CS1 | CS2 | FoolishCop (grid), CS | CSB (tree)")
    sim.add_argument("--robber", required=True,
                     help="robber strategy: RS | RS_MIN (grid), RSA | RSB (tree)")
    sim.add_argument("--cop-p", type=parse_probability, default=None,
                     help="mixing probability for CS2")
    sim.add_argument("--start", type=int, default=None,
                     help="start distance (grid: offset (0, d); tree: both on base)")
    sim.add_argument("--horizon", type=int, default=engine.DEFAULT_HORIZON)
    sim.add_argument("--episodes", type=int, default=engine.DEFAULT_EPISODES)
    sim.add_argument("--format", choices=["json", "csv"], default="json")
    add_common(sim)

    phase = sub.add_parser("phase", help="tree phase sweep over (t_r, t_c)")
    phase.add_argument("--Delta", type=int, required=True)
    phase.add_argument("--delta", type=int, required=True)
    phase.add_argument("--tr-grid", type=parse_probability_list, required=True,
                       help="comma-separated robber tipsiness values")
    phase.add_argument("--tc-grid", type=parse_probability_list, required=True,
                       help="comma-separated cop tipsiness values")
    phase.add_argument("--start", type=int, default=20)
    phase.add_argument("--horizon", type=int, default=engine.DEFAULT_HORIZON)
    phase.add_argument("--episodes", type=int, default=engine.DEFAULT_PHASE_EPISODES)
    phase.add_argument("--capture-threshold", type=parse_probability,
                       default=Fraction(1, 2))
    add_common(phase)

    analyze = sub.add_parser("analyze", help="evaluate every applicable closed form")
    add_game_params(analyze)
    analyze.add_argument("--t", type=parse_probability, default=None,
                         help="total tipsiness (grid analytics)")
    add_common(analyze)

    orc = sub.add_parser("oracle", help="truncated-chain ladder with MC cross-check")
    orc.add_argument("--c", type=parse_probability, required=True)
    orc.add_argument("--r", type=parse_probability, required=True)
    orc.add_argument("--tc", type=parse_probability, required=True)
    orc.add_argument("--tr", type=parse_probability, required=True)
    orc.add_argument("--cop", default="CS1")
    orc.add_argument("--robber", default="RS")
    orc.add_argument("--cop-p", type=parse_probability, default=None)
    orc.add_argument("--start", type=int, default=1)
    orc.add_argument("--radii", type=parse_radius_list, default=[10, 20, 30, 40])
    orc.add_argument("--boundary", choices=[oracle_mod.KILLING, oracle_mod.REFLECTING, "both"],
                     default="both")
    orc.add_argument("--mc-episodes", type=int, default=10_000)
    orc.add_argument("--horizon", type=int, default=engine.DEFAULT_HORIZON)
    add_common(orc)

    return parser


def _grid_strategy(name: str, side: str, cop_p) -> grid_mod.GridStrategy:
    if side == "cop":
        if name == "CS1":
            return grid_mod.cs1()
        if name == "CS2":
            if cop_p is None:
                raise ValueError("CS2 needs --cop-p")
            return grid_mod.cs2(float(cop_p))
        if name == "FoolishCop":
            return grid_mod.foolish_cop()
        raise ValueError(f"unknown grid cop strategy {name!r} (want CS1, CS2, FoolishCop)")
    if name == "RS":
        return grid_mod.rs()
    if name == "RS_MIN":
        return grid_mod.rs_min()
    raise ValueError(f"unknown grid robber strategy {name!r} (want RS, RS_MIN)")


def _tree_strategy(name: str, side: str) -> tree_mod.TreeStrategy:
    kinds = {"cop": ("CS", "CSB"), "robber": ("RSA", "RSB")}[side]
    if name not in kinds:
        raise ValueError(f"unknown tree {side} strategy {name!r} (want {' or '.join(kinds)})")
    return tree_mod.TreeStrategy(name)


def _game_params(args, mode: str) -> GameParams:
    missing = [flag for flag, val in
               (("--c", args.c), ("--r", args.r), ("--tc", args.tc), ("--tr", args.tr))
               if val is None]
    if missing:
        raise ValueError(f"{mode} game needs {', '.join(missing)}")
    params = GameParams(c=args.c, r=args.r, t_c=args.tc, t_r=args.tr, mode=mode)
    validate(params)
    return params


def _tree_params(args) -> tree_mod.TreeParams:
    if args.Delta is None or args.delta is None:
        raise ValueError("tree game needs --Delta and --delta")
    return tree_mod.TreeParams(args.Delta, args.delta)


def _document(args, config: dict, results: dict) -> dict:
    doc = {"config": config, "results": results}
    if not args.deterministic:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        doc["host"] = platform.node()
    return doc


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc: dict) -> None:
    _emit(args, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _batch_results(summary: engine.BatchSummary) -> dict:
    results = {
        "episodes": summary.episodes,
        "horizon": summary.horizon,
        "captures": summary.captures,
        "capture_fraction": tagged(summary.capture_fraction, "mc"),
        "wilson_low": tagged(summary.wilson_low, "mc"),
        "wilson_high": tagged(summary.wilson_high, "mc"),
        "censored_fraction": tagged(summary.censored_fraction, "mc"),
        "mean_capture_time": tagged(summary.mean_capture_time, "mc"),
        "median_capture_time": tagged(summary.median_capture_time, "mc"),
    }
    if summary.tree is not None:
        stats = summary.tree
        results["tree"] = {
            "robber_base_moves": stats.robber_base_moves,
            "cop_base_moves": stats.cop_base_moves,
            "mean_gap": tagged(stats.mean_gap, "mc"),
            "gap_standard_error": tagged(stats.gap_standard_error, "mc"),
            "mean_sign_robber": tagged(stats.mean_sign_robber, "mc"),
            "mean_sign_cop": tagged(stats.mean_sign_cop, "mc"),
            "mean_lower_robber": tagged(stats.mean_lower_robber, "mc"),
            "mean_lower_cop": tagged(stats.mean_lower_cop, "mc"),
            "domination_violations": stats.domination_violations,
            "separated_mismatches": stats.separated_mismatches,
            "total_drift": stats.total_drift,
            "max_cop_depth": stats.max_cop_depth,
            "max_robber_depth": stats.max_robber_depth,
        }
    return results


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.game == GRID:
        params = _game_params(args, GRID)
        cop = _grid_strategy(args.cop, "cop", args.cop_p)
        robber = _grid_strategy(args.robber, "robber", None)
        start_distance = 1 if args.start is None else args.start
        if start_distance < 1:
            raise ValueError(f"start distance must be >= 1, got {start_distance}")
        start = grid_mod.GridState(0, start_distance)
        tree = None
        tree_kwargs = {}
    else:
        params = _game_params(args, TREE)
        tree = _tree_params(args)
        cop = _tree_strategy(args.cop, "cop")
        robber = _tree_strategy(args.robber, "robber")
        start_distance = 20 if args.start is None else args.start
        start = tree_mod.start_on_base(start_distance)
        tree_kwargs = {"tree": tree}

    config = {
        "command": "simulate",
        "game": args.game,
        "c": str(params.c), "r": str(params.r),
        "t_c": str(params.t_c), "t_r": str(params.t_r),
        "cop": args.cop, "robber": args.robber,
        "start_distance": start_distance,
        "horizon": args.horizon, "episodes": args.episodes,
        "seed": seed, "format": args.format,
    }
    if tree is not None:
        config["Delta"] = tree.Delta
        config["delta"] = tree.delta
    if args.cop_p is not None:
        config["cop_p"] = str(args.cop_p)

    summary = engine.run_batch(
        params, cop, robber,
        episodes=args.episodes, horizon=args.horizon, master_seed=seed,
        start=start, threads=args.threads,
        keep_reports=(args.format == "csv"), **tree_kwargs,
    )

    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["episode", "captured", "capture_time", "steps_run", "final_distance"])
        for k, report in enumerate(summary.reports):
            writer.writerow([
                k,
                1 if report.captured else 0,
                report.capture_time if report.captured else "",
                report.steps_run,
                report.final_distance,
            ])
        _emit(args, buf.getvalue())
        return EXIT_OK

    _emit_json(args, _document(args, config, _batch_results(summary)))
    return EXIT_OK


def cmd_phase(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    tree = tree_mod.TreeParams(args.Delta, args.delta)
    points = engine.sweep_phase(
        tree, [float(v) for v in args.tr_grid], [float(v) for v in args.tc_grid],
        episodes=args.episodes, horizon=args.horizon, master_seed=seed,
        start_separation=args.start, threads=args.threads,
        capture_threshold=float(args.capture_threshold),
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t_r", "t_c", "analytic_rsa", "analytic_rsb",
                     "observed_capture_rsa", "observed_capture_rsb"])
    for point in points:
        writer.writerow([
            point.t_r, point.t_c, point.analytic_rsa, point.analytic_rsb,
            "" if math.isnan(point.observed_capture_rsa) else point.observed_capture_rsa,
            "" if math.isnan(point.observed_capture_rsb) else point.observed_capture_rsb,
        ])
    _emit(args, buf.getvalue())
    failures = [p for p in points if p.error]
    for point in failures:
        print(f"note: point (t_r={point.t_r}, t_c={point.t_c}) failed: {point.error}",
              file=sys.stderr)
    return EXIT_OK


def _analyze_grid(args) -> dict:
    if args.c is None or args.r is None:
        raise ValueError("grid analytics need --c and --r")
    if args.t is not None:
        if args.tc is not None or args.tr is not None:
            raise ValueError("give either --t or --tc/--tr, not both")
        t_c = args.t / 2
        t_r = args.t / 2
    else:
        if args.tc is None or args.tr is None:
            raise ValueError("grid analytics need --t or both --tc and --tr")
        t_c, t_r = args.tc, args.tr
    params = GameParams(c=args.c, r=args.r, t_c=t_c, t_r=t_r, mode=GRID)
    validate(params)
    out = {}
    verdict = analytics.grid_regime(params)
    out["regime"] = {
        "winner": verdict.winner.value,
        "walk_class": verdict.walk_class.value if verdict.walk_class else None,
        "detail": verdict.detail,
        "source": verdict.rationale,
    }
    def weight_field(name):
        def get(p):
            model = analytics.grid_weight_model(p)
            return float(getattr(model, name))
        return get
    for name in ("beta", "alpha", "p_star", "sigma_vertical", "sigma_horizontal"):
        out[name] = analytic_or_error(TAG_WEIGHTS, weight_field(name), params)
    def margin_part(part):
        def get(p):
            return float(getattr(analytics.foolish_margin(p), part))
        return get
    for part in ("axis_drift", "off_axis_drift", "margin"):
        out[f"foolish_{part}"] = analytic_or_error(TAG_TWO_ROUND, margin_part(part), params)
    return out


def _analyze_tree(args) -> dict:
    tree = _tree_params(args)
    delta, Delta = tree.delta, tree.Delta
    out = {
        "small_tree_ceiling": analytic_or_error(
            TAG_MARGIN, lambda: float(analytics.small_tree_ceiling(delta))),
        "base_tree_ceiling": analytic_or_error(
            TAG_MARGIN, lambda: float(analytics.base_tree_ceiling(Delta))),
        "crossover_t0": analytic_or_error(
            TAG_DOMINANCE, analytics.crossover_t0, delta, Delta),
    }
    if args.tr is not None:
        t_r = float(args.tr)
        out["threshold_f"] = analytic_or_error(
            TAG_MARGIN, analytics.threshold_f, t_r, delta, Delta)
        out["mu"] = analytic_or_error(TAG_MU, analytics.mu, t_r, delta, Delta)
    if args.tr is not None and args.tc is not None:
        t_r, t_c = float(args.tr), float(args.tc)
        out["rsb_margin"] = analytic_or_error(
            TAG_MARGIN, analytics.rsb_margin, t_r, t_c, delta, Delta)
        def verdict_entry(verdict):
            entry = {
                "winner": verdict.winner.value,
                "detail": verdict.detail,
                "source": verdict.rationale,
            }
            if verdict.walk_class is not None:
                entry["walk_class"] = verdict.walk_class.value
            return entry
        try:
            rsa, rsb = analytics.tree_regime(t_r, t_c, delta, Delta)
            out["regime_rsa"] = verdict_entry(rsa)
            out["regime_rsb"] = verdict_entry(rsb)
        except (ValueError, ArithmeticError) as exc:
            out["regime_rsa"] = {"error": str(exc), "source": TAG_REGIME}
            out["regime_rsb"] = {"error": str(exc), "source": TAG_REGIME}
        try:
            out["regular_tree"] = verdict_entry(
                analytics.regular_tree_regime(delta, t_c, t_r))
        except (ValueError, ArithmeticError) as exc:
            out["regular_tree"] = {"error": str(exc), "source": TAG_REGULAR_TREE}
    return out


def cmd_analyze(args) -> int:
    if args.game == GRID:
        results = _analyze_grid(args)
    else:
        results = _analyze_tree(args)
    config = {"command": "analyze", "game": args.game}
    for attr in ("c", "r", "tc", "tr", "t"):
        value = getattr(args, attr)
        if value is not None:
            config[attr] = str(value)
    for attr in ("Delta", "delta"):
        value = getattr(args, attr, None)
        if value is not None:
            config[attr] = value
    _emit_json(args, _document(args, config, results))
    succeeded = any(
        isinstance(v, dict) and "error" not in v for v in results.values()
    )
    return EXIT_OK if succeeded else EXIT_RUNTIME


def cmd_oracle(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    params = GameParams(c=args.c, r=args.r, t_c=args.tc, t_r=args.tr, mode=GRID)
    validate(params)
    cop = _grid_strategy(args.cop, "cop", args.cop_p)
    robber = _grid_strategy(args.robber, "robber", None)
    if args.start < 1:
        raise ValueError(f"start distance must be >= 1, got {args.start}")
    start = grid_mod.GridState(0, args.start)
    if max(args.radii) < args.start:
        raise ValueError("largest radius is smaller than the start distance")
    boundaries = ([oracle_mod.KILLING, oracle_mod.REFLECTING]
                  if args.boundary == "both" else [args.boundary])

    config = {
        "command": "oracle",
        "c": str(params.c), "r": str(params.r),
        "t_c": str(params.t_c), "t_r": str(params.t_r),
        "cop": args.cop, "robber": args.robber,
        "start_distance": args.start,
        "radii": list(args.radii), "boundary": args.boundary,
        "mc_episodes": args.mc_episodes, "horizon": args.horizon, "seed": seed,
    }

    ladder = []
    reflecting_times = {}
    for boundary in boundaries:
        for radius in args.radii:
            chain = oracle_mod.build_grid_chain(params, cop, robber, radius, boundary)
            solution = oracle_mod.solve(chain)
            prob = solution.capture_probability[start]
            cond = solution.conditional_time[start]
            time_value = None if math.isinf(cond) else cond
            ladder.append({
                "boundary": boundary,
                "radius": radius,
                "capture_probability": tagged(prob, "oracle"),
                "conditional_capture_time": tagged(time_value, "oracle"),
                "sweeps": solution.sweeps,
            })
            if boundary == oracle_mod.REFLECTING:
                reflecting_times[radius] = cond

    batch = engine.run_batch(
        params, cop, robber,
        episodes=args.mc_episodes, horizon=args.horizon, master_seed=seed,
        start=start, threads=args.threads,
    )
    results = {
        "ladder": ladder,
        "monte_carlo": {
            "capture_fraction": tagged(batch.capture_fraction, "mc"),
            "mean_capture_time": tagged(batch.mean_capture_time, "mc"),
            "episodes": args.mc_episodes,
        },
    }
    if reflecting_times and batch.mean_capture_time is not None:
        best = reflecting_times[max(reflecting_times)]
        if not math.isinf(best) and best > 0:
            results["cross_check"] = {
                "oracle_time": tagged(best, "oracle"),
                "mc_time": tagged(batch.mean_capture_time, "mc"),
                "relative_gap": tagged(
                    abs(batch.mean_capture_time - best) / best, "oracle"),
            }
    _emit_json(args, _document(args, config, results))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports flag errors with code 2
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "phase":
            return cmd_phase(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        raise RuntimeError(f"unhandled command {args.command!r}")
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 -- CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
