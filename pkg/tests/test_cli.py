"""Command-line interface: exit codes, golden outputs, schemas, determinism."""

from __future__ import annotations

import csv
import io
import json

import pytest

from tipsy import cli, engine


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    assert code == 0, f"stderr: {err}"
    return json.loads(out)


# --- analyze golden values ------------------------------------------------------


def test_analyze_tree_threshold_at_the_endpoint(capsys):
    doc = run_json(capsys, [
        "analyze", "--game", "tree", "--Delta", "7", "--delta", "2",
        "--tr", "1/2", "--deterministic"])
    results = doc["results"]
    assert abs(results["threshold_f"]["value"] - 7 / 22) < 1e-15
    assert results["crossover_t0"]["value"] == 0.5
    assert results["threshold_f"]["source"].startswith("analytic:")
    # the mean base-return time diverges exactly at the endpoint
    assert "error" in results["mu"]


def test_analyze_grid_balanced_sobriety(capsys):
    doc = run_json(capsys, [
        "analyze", "--game", "grid", "--c", "0.25", "--r", "0.25",
        "--t", "0.5", "--deterministic"])
    regime = doc["results"]["regime"]
    assert regime["winner"] == "CopAS"
    assert regime["walk_class"] == "NullRecurrent"
    # the summable-weights machinery needs c > r and must say so
    assert "error" in doc["results"]["beta"]


def test_analyze_tree_degenerate_crossover(capsys):
    doc = run_json(capsys, [
        "analyze", "--game", "tree", "--Delta", "5", "--delta", "3",
        "--deterministic"])
    assert doc["results"]["crossover_t0"]["value"] == 0.0


def test_analyze_grid_soberer_cop_full_report(capsys):
    doc = run_json(capsys, [
        "analyze", "--game", "grid", "--c", "3/10", "--r", "1/5",
        "--tc", "1/4", "--tr", "1/4", "--deterministic"])
    results = doc["results"]
    assert results["regime"]["winner"] == "CopAS"
    assert results["regime"]["walk_class"] == "PositiveRecurrent"
    beta = (0.2 + 0.5 / 4) / (0.3 + 0.5 / 4)
    assert abs(results["beta"]["value"] - beta) < 1e-12
    p_star = 0.5 * (0.3 - 0.2) / (2 * 0.3 * (2 * 0.2 + 0.5))
    assert abs(results["p_star"]["value"] - p_star) < 1e-12
    for key in ("alpha", "sigma_vertical", "sigma_horizontal", "foolish_margin"):
        assert "value" in results[key], key


def test_analyze_tree_full_report_tags_every_number(capsys):
    doc = run_json(capsys, [
        "analyze", "--game", "tree", "--Delta", "7", "--delta", "3",
        "--tr", "0.1", "--tc", "0.05", "--deterministic"])
    results = doc["results"]
    assert abs(results["mu"]["value"] - 32 / 14.96) < 1e-12
    assert results["regime_rsa"]["winner"] in ("CopAS", "RobberPositiveProb", "Boundary")
    assert results["regime_rsb"]["winner"] == "RobberPositiveProb"
    for entry in results.values():
        assert "source" in entry
        assert entry["source"].startswith(("analytic:", "mc", "oracle"))


# --- simulate -------------------------------------------------------------------


def test_simulate_deterministic_pursuit(capsys):
    doc = run_json(capsys, [
        "simulate", "--game", "grid", "--c", "1", "--r", "0",
        "--tc", "0", "--tr", "0", "--cop", "CS1", "--robber", "RS",
        "--start", "3", "--episodes", "5", "--horizon", "50",
        "--seed", "1", "--deterministic"])
    results = doc["results"]
    assert results["capture_fraction"]["value"] == 1.0
    assert results["mean_capture_time"]["value"] == 3.0
    assert results["captures"] == 5
    assert doc["config"]["start_distance"] == 3


def test_simulate_csv_schema(capsys):
    code, out, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
        "--episodes", "12", "--horizon", "500", "--seed", "2",
        "--format", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["episode", "captured", "capture_time", "steps_run", "final_distance"]
    assert len(rows) == 1 + 12
    for k, row in enumerate(rows[1:]):
        assert row[0] == str(k)
        assert row[1] in ("0", "1")
        if row[1] == "1":
            assert int(row[2]) == int(row[3])
            assert row[4] == "0"
        else:
            assert row[2] == ""
            assert int(row[4]) > 0


def test_simulate_csv_censored_episodes_leave_capture_time_blank(capsys):
    # a never-sober cop against an always-fleeing robber cannot capture
    code, out, _ = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0", "--r", "1",
        "--tc", "0", "--tr", "0", "--cop", "CS1", "--robber", "RS",
        "--episodes", "3", "--horizon", "40", "--seed", "0",
        "--format", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert all(row[1] == "0" and row[2] == "" for row in rows)
    assert all(int(row[4]) == 41 for row in rows)  # start 1 + 40 fleeing steps


def test_simulate_tree_reports_base_move_stats(capsys):
    doc = run_json(capsys, [
        "simulate", "--game", "tree", "--Delta", "7", "--delta", "3",
        "--c", "0.4", "--r", "0.4", "--tc", "0.1", "--tr", "0.1",
        "--cop", "CSB", "--robber", "RSB", "--start", "6",
        "--episodes", "10", "--horizon", "300", "--seed", "3",
        "--deterministic"])
    stats = doc["results"]["tree"]
    assert stats["robber_base_moves"] > 0
    assert stats["domination_violations"] == 0
    assert stats["separated_mismatches"] == 0
    assert doc["config"]["Delta"] == 7


# --- exit codes and configuration errors ------------------------------------------


def test_bad_probability_sum_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.6", "--r", "0.6",
        "--tc", "0.2", "--tr", "0.2", "--cop", "CS1", "--robber", "RS"])
    assert code == 2
    assert "sum-to-one" in err
    assert "8/5" in err


def test_unknown_strategy_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS9", "--robber", "RS"])
    assert code == 2
    assert "CS9" in err


def test_cs2_without_mixing_probability_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS2", "--robber", "RS"])
    assert code == 2
    assert "--cop-p" in err


def test_tree_game_without_shape_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "tree", "--c", "0.4", "--r", "0.4",
        "--tc", "0.1", "--tr", "0.1", "--cop", "CS", "--robber", "RSA"])
    assert code == 2
    assert "--Delta" in err


def test_malformed_probability_exits_2(capsys):
    code, _, _ = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "zero", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS"])
    assert code == 2


def test_unknown_flag_exits_2(capsys):
    code, _, _ = run_cli(capsys, ["simulate", "--no-such-flag"])
    assert code == 2


def test_tree_half_split_violation_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "tree", "--Delta", "7", "--delta", "3",
        "--c", "0.5", "--r", "0.3", "--tc", "0.1", "--tr", "0.1",
        "--cop", "CS", "--robber", "RSA"])
    assert code == 2
    assert "half-split" in err


def test_runtime_failure_exits_3(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("solver fell over")
    monkeypatch.setattr(engine, "run_batch", boom)
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
        "--episodes", "1"])
    assert code == 3
    assert "solver fell over" in err


# --- seeds -----------------------------------------------------------------------


def test_seed_env_var_is_the_default(capsys, monkeypatch):
    monkeypatch.setenv("TIPSY_SEED", "424242")
    doc = run_json(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
        "--episodes", "2", "--horizon", "50", "--deterministic"])
    assert doc["config"]["seed"] == 424242


def test_seed_flag_overrides_the_env_var(capsys, monkeypatch):
    monkeypatch.setenv("TIPSY_SEED", "424242")
    doc = run_json(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
        "--episodes", "2", "--horizon", "50", "--seed", "7",
        "--deterministic"])
    assert doc["config"]["seed"] == 7


def test_garbage_seed_env_var_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("TIPSY_SEED", "not-a-seed")
    code, _, err = run_cli(capsys, [
        "simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
        "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
        "--episodes", "1", "--horizon", "10"])
    assert code == 2
    assert "TIPSY_SEED" in err


# --- fractions -------------------------------------------------------------------


def test_fraction_flags_are_parsed_exactly(capsys):
    doc = run_json(capsys, [
        "simulate", "--game", "tree", "--Delta", "7", "--delta", "3",
        "--c", "2/5", "--r", "2/5", "--tc", "1/10", "--tr", "1/10",
        "--cop", "CS", "--robber", "RSA", "--episodes", "2",
        "--horizon", "50", "--seed", "0", "--deterministic"])
    assert doc["config"]["c"] == "2/5"
    assert doc["config"]["t_c"] == "1/10"


def test_fraction_and_decimal_spellings_agree(capsys, tmp_path):
    base = ["simulate", "--game", "grid", "--cop", "CS1", "--robber", "RS",
            "--episodes", "30", "--horizon", "400", "--seed", "11",
            "--deterministic", "--format", "csv"]
    code, out_frac, _ = run_cli(capsys, base + [
        "--c", "3/10", "--r", "1/5", "--tc", "1/4", "--tr", "1/4"])
    assert code == 0
    code, out_dec, _ = run_cli(capsys, base + [
        "--c", "0.3", "--r", "0.2", "--tc", "0.25", "--tr", "0.25"])
    assert code == 0
    assert out_frac == out_dec


# --- determinism ------------------------------------------------------------------


def test_deterministic_json_is_byte_identical_across_threads(capsys):
    argv = ["simulate", "--game", "grid", "--c", "0.3", "--r", "0.2",
            "--tc", "0.25", "--tr", "0.25", "--cop", "CS1", "--robber", "RS",
            "--episodes", "100", "--horizon", "1000", "--seed", "42",
            "--deterministic"]
    outputs = []
    for threads in ("1", "4", "2"):
        code, out, _ = run_cli(capsys, argv + ["--threads", threads])
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1] == outputs[2]


def test_deterministic_flag_strips_the_volatile_fields(capsys):
    argv = ["analyze", "--game", "tree", "--Delta", "7", "--delta", "2"]
    doc_live = run_json(capsys, argv)
    doc_det = run_json(capsys, argv + ["--deterministic"])
    assert "timestamp" in doc_live and "host" in doc_live
    assert "timestamp" not in doc_det and "host" not in doc_det
    assert doc_live["results"] == doc_det["results"]


def test_output_flag_writes_the_file(capsys, tmp_path):
    target = tmp_path / "run.json"
    code, out, _ = run_cli(capsys, [
        "analyze", "--game", "tree", "--Delta", "7", "--delta", "2",
        "--deterministic", "--output", str(target)])
    assert code == 0
    assert out == ""
    doc = json.loads(target.read_text())
    assert doc["config"]["Delta"] == 7


# --- phase ------------------------------------------------------------------------


def test_phase_csv_header_and_verdicts(capsys):
    code, out, err = run_cli(capsys, [
        "phase", "--Delta", "7", "--delta", "3",
        "--tr-grid", "0.05,0.3", "--tc-grid", "0.05",
        "--episodes", "20", "--horizon", "400", "--seed", "5",
        "--start", "6"])
    assert code == 0, err
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t_r", "t_c", "analytic_rsa", "analytic_rsb",
                       "observed_capture_rsa", "observed_capture_rsb"]
    assert len(rows) == 3
    for row in rows[1:]:
        assert row[2] in ("CopAS", "RobberPositiveProb", "Boundary")
        assert 0.0 <= float(row[4]) <= 1.0


def test_phase_reports_failed_points_on_stderr(capsys):
    code, out, err = run_cli(capsys, [
        "phase", "--Delta", "7", "--delta", "3",
        "--tr-grid", "0.7", "--tc-grid", "0.1",
        "--episodes", "5", "--horizon", "50", "--seed", "0"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 2
    assert rows[1][2] == "" and rows[1][4] == ""
    assert "failed" in err


# --- oracle -----------------------------------------------------------------------


def test_oracle_ladder_and_cross_check(capsys):
    doc = run_json(capsys, [
        "oracle", "--c", "0.3", "--r", "0.2", "--tc", "0.25", "--tr", "0.25",
        "--radii", "10,20", "--mc-episodes", "400", "--horizon", "5000",
        "--seed", "3", "--deterministic"])
    ladder = doc["results"]["ladder"]
    assert {entry["boundary"] for entry in ladder} == {"killing", "reflecting"}
    killing = {e["radius"]: e for e in ladder if e["boundary"] == "killing"}
    assert killing[10]["capture_probability"]["value"] < killing[20]["capture_probability"]["value"] < 1
    for entry in ladder:
        assert entry["capture_probability"]["source"] == "oracle"
    cross = doc["results"]["cross_check"]
    assert cross["relative_gap"]["value"] < 0.15
    assert doc["results"]["monte_carlo"]["capture_fraction"]["source"] == "mc"


def test_oracle_radius_below_start_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "oracle", "--c", "0.3", "--r", "0.2", "--tc", "0.25", "--tr", "0.25",
        "--radii", "5", "--start", "8"])
    assert code == 2
    assert "radius" in err
