"""Tests for the composite-tree arena: addresses, moves, and the summary chain."""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tipsy.spinner import GameParams, RngStream, TREE
from tipsy import tree as T
from tipsy.analytics import mu


SHAPES = [T.TreeParams(7, 3), T.TreeParams(3, 2), T.TreeParams(5, 4), T.TreeParams(6, 6)]


def deep_letter(tree: T.TreeParams) -> int:
    """A legal non-attachment copy letter (0 when delta == 2)."""
    return 1 % (tree.delta - 1)


def make_summary_state(tree: T.TreeParams, summary: tuple) -> T.TreeGameState:
    """Build an address pair realizing a (gap, a, b, shared) summary."""
    gap, a, b, shared = summary
    d = deep_letter(tree)
    if gap > 0:
        cop_word = tuple((0, 1) * gap)[:gap]
        cop = T.TreeVertex(cop_word, tuple([0] + [d] * (a - 1)) if a else ())
        rob = T.TreeVertex((), tuple([0] + [d] * (b - 1)) if b else ())
    else:
        base = (0, 1)
        rob_path = tuple([0] + [d] * (b - 1)) if b else ()
        cop_letters = list(rob_path[:shared])
        while len(cop_letters) < a:
            if not cop_letters:
                cop_letters.append(0)
            elif len(cop_letters) == shared and shared < min(a, b):
                cop_letters.append((rob_path[shared] + 1) % (tree.delta - 1))
            else:
                cop_letters.append(d)
        cop = T.TreeVertex(base, tuple(cop_letters))
        rob = T.TreeVertex(base, rob_path)
    state = T.TreeGameState(cop=cop, robber=rob)
    assert T.reduce_state(state) == summary
    return state


def realizable_summaries(tree: T.TreeParams, limit: int = 3):
    """Every non-captured summary with all coordinates <= limit."""
    out = []
    for gap in range(0, limit + 1):
        for a in range(0, limit + 1):
            for b in range(0, limit + 1):
                if gap > 0:
                    out.append((gap, a, b, 0))
                    continue
                if a >= 1 and b >= 1:
                    shareds = range(1, min(a, b) + 1)
                else:
                    shareds = [0]
                for shared in shareds:
                    if tree.delta == 2 and min(a, b) >= 1 and shared != min(a, b):
                        continue  # half-line copies cannot diverge below the root
                    s = (gap, a, b, shared)
                    if not T.summary_captured(s):
                        out.append(s)
    return out


@st.composite
def vertices(draw, tree: T.TreeParams, max_base: int = 5, max_depth: int = 4):
    base_len = draw(st.integers(0, max_base))
    word = []
    for _ in range(base_len):
        letter = draw(st.integers(0, tree.Delta - 2))
        if word and word[-1] == letter:
            letter = (letter + 1) % (tree.Delta - 1)
        word.append(letter)
    depth = draw(st.integers(0, max_depth))
    small = []
    if depth:
        small = [0] + [draw(st.integers(0, tree.delta - 2)) for _ in range(depth - 1)]
    return T.TreeVertex(tuple(word), tuple(small))


# --- parameters and addresses ----------------------------------------------------


def test_tree_params_validation():
    T.TreeParams(3, 2)
    T.TreeParams(7, 7)
    with pytest.raises(ValueError):
        T.TreeParams(2, 2)
    with pytest.raises(ValueError):
        T.TreeParams(5, 1)
    with pytest.raises(ValueError):
        T.TreeParams(3, 4)
    with pytest.raises(ValueError):
        T.TreeParams(3.5, 2)


def test_vertex_validation():
    tree = T.TreeParams(4, 3)
    T.validate_vertex(tree, T.TreeVertex((0, 1, 2), (0, 1, 0)))
    with pytest.raises(ValueError, match="outside"):
        T.validate_vertex(tree, T.TreeVertex((3,), ()))
    with pytest.raises(ValueError, match="not reduced"):
        T.validate_vertex(tree, T.TreeVertex((1, 1), ()))
    with pytest.raises(ValueError, match="attachment"):
        T.validate_vertex(tree, T.TreeVertex((), (1,)))
    with pytest.raises(ValueError, match="outside"):
        T.validate_vertex(tree, T.TreeVertex((), (0, 2)))


def test_base_step_is_an_involution():
    for word in [(), (0,), (0, 1), (2, 0, 1)]:
        for letter in range(3):
            once = T.base_step(word, letter)
            assert T.base_step(once, letter) == word
            assert once != word


def test_distance_pinned_values():
    root = T.TreeVertex((), ())
    assert T.distance(root, root) == 0
    assert T.distance(root, T.TreeVertex((), (0,))) == 1
    assert T.distance(root, T.TreeVertex((2,), ())) == 1
    # out of one copy, across the base, into another copy
    u = T.TreeVertex((0,), (0, 1))
    v = T.TreeVertex((1, 0), (0,))
    base_edges = 3  # (0,) -> () -> (1,) -> (1, 0)
    assert T.distance(u, v) == len(u.small_path) + base_edges + len(v.small_path)
    # same copy: shared path cancels
    a = T.TreeVertex((4,), (0, 1, 1))
    b = T.TreeVertex((4,), (0, 1, 0, 0))
    assert T.distance(a, b) == 3 + 4 - 2 * 2


def test_distance_matches_breadth_first_search():
    tree = T.TreeParams(4, 3)
    radius = 8
    root = T.TreeVertex((), ())
    dist_from_root = {root: 0}
    frontier = deque([root])
    while frontier:
        v = frontier.popleft()
        if dist_from_root[v] == radius:
            continue
        for n in T.neighbors(tree, v):
            if n not in dist_from_root:
                dist_from_root[n] = dist_from_root[v] + 1
                frontier.append(n)
    ball = list(dist_from_root)
    assert len(ball) > 1000
    # within-ball geodesics stay in the ball (tree convexity), so a BFS
    # restricted to it is an independent oracle for the word-arithmetic distance
    adjacency = {v: [n for n in T.neighbors(tree, v) if n in dist_from_root] for v in ball}
    rng = RngStream(20260816, 3).generator()
    sources = [ball[int(u * len(ball))] for u in rng.random(25)]
    for src in sources:
        seen = {src: 0}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            for n in adjacency[v]:
                if n not in seen:
                    seen[n] = seen[v] + 1
                    queue.append(n)
        targets = [ball[int(u * len(ball))] for u in rng.random(40)]
        for dst in targets:
            if max(dist_from_root[src], dist_from_root[dst]) < radius:
                assert T.distance(src, dst) == seen[dst], (src, dst)


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_distance_is_a_metric_and_neighbors_are_adjacent(data):
    tree = data.draw(st.sampled_from(SHAPES))
    u = data.draw(vertices(tree))
    v = data.draw(vertices(tree))
    w = data.draw(vertices(tree))
    assert T.distance(u, v) == T.distance(v, u)
    assert (T.distance(u, v) == 0) == (u == v)
    assert T.distance(u, w) <= T.distance(u, v) + T.distance(v, w)
    for n in T.neighbors(tree, u):
        assert T.distance(u, n) == 1


def test_projection_is_idempotent_on_random_vertices():
    tree = T.TreeParams(6, 4)
    gen = RngStream(414243, 0).generator()
    for _ in range(10_000):
        word = []
        for _ in range(int(gen.random() * 6)):
            letter = int(gen.random() * (tree.Delta - 1))
            if word and word[-1] == letter:
                letter = (letter + 1) % (tree.Delta - 1)
            word.append(letter)
        depth = int(gen.random() * 5)
        small = tuple([0] + [int(gen.random() * (tree.delta - 1)) for _ in range(depth - 1)]) if depth else ()
        v = T.TreeVertex(tuple(word), small)
        p = T.project_to_base(v)
        assert p.on_base
        assert T.project_to_base(p) == p
        assert T.distance(v, p) == v.depth


def test_degrees():
    for tree in SHAPES:
        on_base = T.TreeVertex((0, 1), ())
        off_base = T.TreeVertex((0,), (0,) + (deep_letter(tree),) * 2)
        assert len(T.neighbors(tree, on_base)) == tree.Delta
        assert len(set(T.neighbors(tree, on_base))) == tree.Delta
        assert len(T.neighbors(tree, off_base)) == tree.delta
        assert len(set(T.neighbors(tree, off_base))) == tree.delta


# --- strategies and single moves --------------------------------------------------


def test_strategy_sides():
    assert T.cs().side == T.COP
    assert T.csb().side == T.COP
    assert T.rsa().side == T.ROBBER
    assert T.rsb().side == T.ROBBER
    with pytest.raises(ValueError):
        T.TreeStrategy("CS2")


def test_pursuit_closes_distance_by_one():
    tree = T.TreeParams(5, 3)
    for summary in realizable_summaries(tree, limit=3):
        state = make_summary_state(tree, summary)
        before = T.distance(state.cop, state.robber)
        after_state = T.sober_move_tree(tree, T.cs(), state, 0.5)
        assert T.distance(after_state.cop, after_state.robber) == before - 1


def test_base_pursuit_behaviors():
    tree = T.TreeParams(5, 3)
    # off the base: climb out
    state = make_summary_state(tree, (2, 2, 1, 0))
    nxt = T.sober_move_tree(tree, T.csb(), state, 0.5)
    assert nxt.cop.depth == 1
    # on the base, robber's copy elsewhere: walk the base toward its projection
    state = make_summary_state(tree, (2, 0, 1, 0))
    nxt = T.sober_move_tree(tree, T.csb(), state, 0.5)
    assert nxt.cop.on_base
    assert T.distance(nxt.cop, T.project_to_base(nxt.robber)) == 1
    # under the robber's copy: stay
    state = make_summary_state(tree, (0, 0, 2, 0))
    assert T.sober_move_tree(tree, T.csb(), state, 0.5) == state


def test_fleeing_robber_moves():
    tree = T.TreeParams(5, 3)
    # off the base, cop outside: any child, never the parent
    state = make_summary_state(tree, (1, 0, 2, 0))
    results = {T.sober_move_tree(tree, T.rsa(), state, u).robber for u in (0.1, 0.6, 0.9)}
    assert all(r.depth == 3 for r in results)
    assert len(results) == 2
    # off the base, cop below in the same copy: parent or the far children
    state = make_summary_state(tree, (0, 3, 1, 1))
    moved = {T.sober_move_tree(tree, T.rsa(), state, u).robber for u in (0.05, 0.4, 0.8)}
    depths = sorted(v.depth for v in moved)
    assert depths == [0, 2]  # parent plus the one non-blocked child
    # base-seeking robber backtracks when off the base
    state = make_summary_state(tree, (3, 1, 2, 0))
    nxt = T.sober_move_tree(tree, T.rsb(), state, 0.5)
    assert nxt.robber.depth == 1
    # on the base both behave alike: strictly away from the cop
    state = make_summary_state(tree, (2, 1, 0, 0))
    for strat in (T.rsa(), T.rsb()):
        for u in (0.0, 0.3, 0.7, 0.999):
            nxt = T.sober_move_tree(tree, strat, state, u)
            assert T.distance(nxt.cop, nxt.robber) == T.distance(state.cop, state.robber) + 1
            assert nxt.robber.on_base


def test_moves_refuse_captured_states():
    tree = T.TreeParams(4, 3)
    v = T.TreeVertex((0,), (0, 1))
    state = T.TreeGameState(cop=v, robber=v)
    with pytest.raises(ValueError, match="capture"):
        T.sober_move_tree(tree, T.cs(), state, 0.5)
    with pytest.raises(ValueError, match="capture"):
        T.tipsy_move_tree(tree, state, T.COP, 0.5)


def test_tipsy_frequency_on_base():
    tree = T.TreeParams(7, 3)
    state = make_summary_state(tree, (3, 0, 0, 0))
    gen = RngStream(515253, 0).generator()
    counts = {}
    n = 1_000_000
    for u in gen.random(n):
        nxt = T.tipsy_move_tree(tree, state, T.ROBBER, u)
        counts[nxt.robber] = counts.get(nxt.robber, 0) + 1
    assert len(counts) == tree.Delta
    expected = n / tree.Delta
    sigma = math.sqrt(n * (1 / tree.Delta) * (1 - 1 / tree.Delta))
    for vertex, count in counts.items():
        assert abs(count - expected) < 3 * sigma, f"{vertex}: {count} vs {expected:.0f}"


def test_tipsy_on_half_line():
    tree = T.TreeParams(4, 2)
    state = make_summary_state(tree, (2, 0, 3, 0))
    for u in (0.1, 0.45, 0.55, 0.9):
        nxt = T.tipsy_move_tree(tree, state, T.ROBBER, u)
        assert abs(nxt.robber.depth - 3) == 1


# --- the summary chain is an exact lumping ---------------------------------------


def law(fn, cells: int):
    out = {}
    for i in range(cells):
        u = (i + 0.5) / cells
        nxt = fn(u)
        out[nxt] = out.get(nxt, 0) + Fraction(1, cells)
    return out


@pytest.mark.parametrize("tree", SHAPES, ids=lambda t: f"D{t.Delta}d{t.delta}")
def test_summary_chain_matches_address_dynamics(tree):
    cells = math.lcm(tree.Delta, tree.Delta - 1, tree.Delta - 2, tree.delta, tree.delta - 1)
    mismatches = []
    for summary in realizable_summaries(tree, limit=3):
        state = make_summary_state(tree, summary)
        for kind in ("CS", "CSB", "RSA", "RSB"):
            strat = T.TreeStrategy(kind)
            addr = law(lambda u: T.reduce_state(T.sober_move_tree(tree, strat, state, u)), cells)
            summ = law(lambda u: T.summary_sober_move(tree, kind, summary, u)[0], cells)
            if addr != summ:
                mismatches.append((kind, summary, addr, summ))
        for mover in (T.COP, T.ROBBER):
            addr = law(lambda u: T.reduce_state(T.tipsy_move_tree(tree, state, mover, u)), cells)
            summ = law(lambda u: T.summary_tipsy_move(tree, summary, mover, u)[0], cells)
            if addr != summ:
                mismatches.append((mover, summary, addr, summ))
    assert not mismatches, mismatches[:3]


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_summary_distance_matches_address_distance(data):
    tree = data.draw(st.sampled_from(SHAPES))
    cop = data.draw(vertices(tree))
    robber = data.draw(vertices(tree))
    state = T.TreeGameState(cop=cop, robber=robber)
    summary = T.reduce_state(state)
    assert T.summary_distance(summary) == T.distance(cop, robber)
    assert T.summary_captured(summary) == state.captured


def test_summary_moves_change_distance_by_at_most_one():
    tree = T.TreeParams(6, 4)
    cells = math.lcm(tree.Delta, tree.Delta - 1, tree.Delta - 2, tree.delta, tree.delta - 1)
    for summary in realizable_summaries(tree, limit=3):
        d0 = T.summary_distance(summary)
        for kind in ("CS", "CSB", "RSA", "RSB"):
            for i in range(cells):
                nxt, _ = T.summary_sober_move(tree, kind, summary, (i + 0.5) / cells)
                delta_d = T.summary_distance(nxt) - d0
                if kind == "CS":
                    assert delta_d == -1
                elif kind == "CSB" and nxt == summary:
                    assert delta_d == 0
                else:
                    assert abs(delta_d) == 1
        for mover in (T.COP, T.ROBBER):
            for i in range(cells):
                nxt, _ = T.summary_tipsy_move(tree, summary, mover, (i + 0.5) / cells)
                assert abs(T.summary_distance(nxt) - d0) == 1


def test_stay_records_positive_sign():
    tree = T.TreeParams(5, 3)
    summary = (0, 0, 2, 0)
    nxt, move = T.summary_sober_move(tree, "CSB", summary, 0.5)
    assert nxt == summary
    assert move == (+1, -1)


def test_capture_by_pursuit_step():
    tree = T.TreeParams(5, 3)
    nxt, move = T.summary_sober_move(tree, "CS", (1, 0, 0, 0), 0.5)
    assert nxt == (0, 0, 0, 0)
    assert T.summary_captured(nxt)
    assert move == (-1, -1)


# --- episodes ---------------------------------------------------------------------


def tree_game(c, r, t_c, t_r):
    return GameParams(c=c, r=r, t_c=t_c, t_r=t_r, mode=TREE)


def test_run_validates_inputs():
    tree = T.TreeParams(7, 3)
    start = T.start_on_base(4)
    grid_params = GameParams(c=0.3, r=0.2, t_c=0.25, t_r=0.25)
    with pytest.raises(ValueError, match="mode"):
        T.run_tree_episode(tree, grid_params, T.cs(), T.rsa(), start, 10, RngStream(1, 0))
    params = tree_game(0.4, 0.4, 0.1, 0.1)
    with pytest.raises(ValueError, match="cop and one robber"):
        T.run_tree_episode(tree, params, T.rsa(), T.rsb(), start, 10, RngStream(1, 0))
    captured = T.TreeGameState(cop=T.TreeVertex((), ()), robber=T.TreeVertex((), ()))
    with pytest.raises(ValueError, match="captured"):
        T.run_tree_episode(tree, params, T.cs(), T.rsa(), captured, 10, RngStream(1, 0))
    bad_start = T.TreeGameState(cop=T.TreeVertex((9,), ()), robber=T.TreeVertex((), ()))
    with pytest.raises(ValueError, match="outside"):
        T.run_tree_episode(tree, params, T.cs(), T.rsa(), bad_start, 10, RngStream(1, 0))


def test_start_on_base():
    for sep in (1, 2, 5, 20):
        state = T.start_on_base(sep)
        assert state.cop.on_base and state.robber.on_base
        assert T.distance(state.cop, state.robber) == sep
    with pytest.raises(ValueError):
        T.start_on_base(0)


def test_episodes_are_reproducible_per_stream():
    tree = T.TreeParams(7, 3)
    params = tree_game(0.4, 0.4, 0.1, 0.1)
    first = T.run_tree_episode(tree, params, T.csb(), T.rsb(), T.start_on_base(6), 4000,
                               RngStream(8642, 3), record_detail=True)
    second = T.run_tree_episode(tree, params, T.csb(), T.rsb(), T.start_on_base(6), 4000,
                                RngStream(8642, 3), record_detail=True)
    assert first == second
    other = T.run_tree_episode(tree, params, T.csb(), T.rsb(), T.start_on_base(6), 4000,
                               RngStream(8642, 4), record_detail=True)
    assert first != other


def test_sober_game_on_regular_tree_is_null_recurrent_like():
    # X(3,3) with no tipsiness: the distance walks +-1 with even odds, so
    # capture from a short start is eventually sure but slow to saturate
    tree = T.TreeParams(3, 3)
    params = tree_game(0.5, 0.5, 0.0, 0.0)
    captures_short = 0
    captures_long = 0
    for k in range(60):
        short = T.run_tree_episode(tree, params, T.cs(), T.rsa(), T.start_on_base(2), 100,
                                   RngStream(97531, k))
        longer = T.run_tree_episode(tree, params, T.cs(), T.rsa(), T.start_on_base(2), 4000,
                                    RngStream(97531, k))
        captures_short += short.captured
        captures_long += longer.captured
        if short.captured:
            assert short.capture_time % 2 == 0  # parity: distance 2 start, +-1 steps
    assert captures_short < captures_long <= 60
    assert captures_long >= 50


def test_gap_renewal_matches_base_return_time():
    # long escape run: robber base moves arrive as a renewal process whose
    # mean spacing has a closed form in the tipsiness and the two degrees
    tree = T.TreeParams(7, 3)
    params = tree_game(0.4, 0.4, 0.1, 0.1)
    report = T.run_tree_episode(tree, params, T.csb(), T.rsb(), T.start_on_base(20),
                                300_000, RngStream(90210, 0))
    stats = report.tree_stats
    assert stats.completed_gaps >= 100_000
    observed = stats.sum_gap / stats.completed_gaps
    expected = mu(0.1, 3, 7)
    assert abs(observed - expected) / expected < 0.01, f"{observed} vs {expected}"


def test_recorded_signs_and_lower_bounds():
    tree = T.TreeParams(7, 3)
    params = tree_game(0.45, 0.4, 0.05, 0.1)
    total_r = total_c = 0
    sum_lower_r = sum_lower_c = 0.0
    for k in range(60):
        report = T.run_tree_episode(tree, params, T.csb(), T.rsb(), T.start_on_base(20),
                                    2000, RngStream(112358, k), record_detail=True)
        stats = report.tree_stats
        assert stats.domination_violations == 0
        assert stats.separated_mismatches == 0
        # drift telescopes the recorded signs
        assert stats.drift == stats.sum_sign_robber + stats.sum_sign_cop
        assert stats.drift == sum(stats.robber_move_signs) + sum(stats.cop_move_signs)
        assert stats.robber_move_times == sorted(stats.robber_move_times)
        assert stats.completed_gaps == stats.robber_base_moves
        if stats.robber_move_times:
            assert stats.sum_gap == stats.robber_move_times[-1]
        total_r += stats.robber_base_moves
        total_c += stats.cop_base_moves
        sum_lower_r += stats.sum_lower_robber
        sum_lower_c += stats.sum_lower_cop
    t_r, t_c, Delta = 0.1, 0.05, 7
    expect_r = (1 - 6 * t_r / Delta) / (1 - 2 * t_r / Delta)
    expect_c = -(1 - (4 * Delta - 6) * t_c / Delta) / (1 - 2 * t_c / Delta)
    for total, seen, expect in ((total_r, sum_lower_r, expect_r), (total_c, sum_lower_c, expect_c)):
        mean = seen / total
        sigma = math.sqrt(max(1e-12, 1 - expect * expect) / total)
        assert abs(mean - expect) < 3 * sigma, f"{mean} vs {expect} (sigma {sigma})"


def test_zero_horizon_reports_initial_distance():
    tree = T.TreeParams(5, 3)
    params = tree_game(0.4, 0.4, 0.1, 0.1)
    report = T.run_tree_episode(tree, params, T.cs(), T.rsa(), T.start_on_base(7), 0,
                                RngStream(5, 0))
    assert not report.captured
    assert report.steps_run == 0
    assert report.final_distance == 7
