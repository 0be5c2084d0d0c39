"""The chase on a regular base tree with an infinite tree grafted at each vertex.

The arena is built from a (Delta-1)-regular base tree by attaching, at every
base vertex, the root of an infinite small tree in which each vertex has
degree delta (the root hangs from its base vertex by a single edge, then
every small-tree vertex has delta - 1 children).  Base vertices end up with
degree Delta, small-tree vertices with degree delta; taking Delta == delta
gives the plain delta-regular tree.

Vertices are canonical addresses: a reduced word of base-edge labels (each
label is an involution -- stepping the same label twice returns) plus the
child path into the attached small tree.  All strategy definitions reduce to
word arithmetic on these addresses.

Episodes are simulated on a lumped four-number summary of the pair state
(base distance between the players' projections, each player's depth inside
its copy, and the shared-path length when they occupy the same copy).  The
lumping is exact -- tests enumerate one-round laws at address level and at
summary level and require equal distributions -- and it is what makes
long-horizon simulation and the compiled kernels cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._report import EpisodeReport
from .spinner import GameParams, RngStream, SpinnerOutcome, TREE, spin, validate

COP = "cop"
ROBBER = "robber"


@dataclass(frozen=True)
class TreeParams:
    """Degrees of the composite tree: Delta on the base, delta in the copies."""

    Delta: int
    delta: int

    def __post_init__(self) -> None:
        if int(self.Delta) != self.Delta or int(self.delta) != self.delta:
            raise ValueError(
                f"tree degrees must be integers, got Delta={self.Delta}, delta={self.delta}"
            )
        if self.Delta < 3:
            raise ValueError(f"base degree Delta must be >= 3, got {self.Delta}")
        if self.delta < 2:
            raise ValueError(f"copy degree delta must be >= 2, got {self.delta}")
        if self.Delta < self.delta:
            raise ValueError(
                f"need Delta >= delta, got Delta={self.Delta} < delta={self.delta}"
            )


@dataclass(frozen=True)
class TreeVertex:
    """Canonical address: reduced base word, then the path into one copy.

    base_path letters lie in {0..Delta-2}; stepping a label equal to the last
    letter cancels it (labels are involutions), so reduced means no repeated
    adjacent letter.  small_path is empty for base vertices; otherwise its
    first letter is always 0 (each base vertex hangs exactly one copy) and
    deeper letters lie in {0..delta-2}.
    """

    base_path: tuple = ()
    small_path: tuple = ()

    @property
    def depth(self) -> int:
        """Distance from the base tree."""
        return len(self.small_path)

    @property
    def on_base(self) -> bool:
        return not self.small_path


def validate_vertex(tree: TreeParams, vertex: TreeVertex) -> None:
    """Check an address against the tree's degrees."""
    for i, letter in enumerate(vertex.base_path):
        if not 0 <= letter <= tree.Delta - 2:
            raise ValueError(f"base letter {letter} outside 0..{tree.Delta - 2}")
        if i > 0 and vertex.base_path[i - 1] == letter:
            raise ValueError(f"base word {vertex.base_path} is not reduced")
    if vertex.small_path:
        if vertex.small_path[0] != 0:
            raise ValueError("small paths start with the single attachment edge 0")
        for letter in vertex.small_path[1:]:
            if not 0 <= letter <= tree.delta - 2:
                raise ValueError(f"copy letter {letter} outside 0..{tree.delta - 2}")


def base_step(word: tuple, letter: int) -> tuple:
    """One base-tree step along an involution label: cancel or append."""
    if word and word[-1] == letter:
        return word[:-1]
    return word + (letter,)


def _common_prefix(a: tuple, b: tuple) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def distance(u: TreeVertex, v: TreeVertex) -> int:
    """Graph distance between two addresses (the unique tree path length)."""
    p = _common_prefix(u.base_path, v.base_path)
    through_base = (len(u.base_path) - p) + (len(v.base_path) - p)
    if through_base == 0:
        q = _common_prefix(u.small_path, v.small_path)
        return len(u.small_path) + len(v.small_path) - 2 * q
    return through_base + len(u.small_path) + len(v.small_path)


def project_to_base(v: TreeVertex) -> TreeVertex:
    """Closest base-tree vertex: drop the copy path."""
    return TreeVertex(base_path=v.base_path, small_path=())


def neighbors(tree: TreeParams, v: TreeVertex) -> list:
    """All adjacent addresses: Delta of them on the base, delta in a copy."""
    if v.on_base:
        out = [
            TreeVertex(base_step(v.base_path, letter), ())
            for letter in range(tree.Delta - 1)
        ]
        out.append(TreeVertex(v.base_path, (0,)))
        return out
    out = [TreeVertex(v.base_path, v.small_path[:-1])]
    out.extend(
        TreeVertex(v.base_path, v.small_path + (child,))
        for child in range(tree.delta - 1)
    )
    return out


@dataclass(frozen=True)
class TreeGameState:
    """Both players' addresses; capture is address equality."""

    cop: TreeVertex
    robber: TreeVertex

    @property
    def captured(self) -> bool:
        return self.cop == self.robber


@dataclass(frozen=True)
class TreeStrategy:
    """One of the four named behaviors.

    CS   -- cop steps along the unique path toward the robber.
    CSB  -- cop pursues on the base tree: climbs out of copies, walks the
            base toward the robber's projection, and stays put rather than
            enter the copy the robber hides in (the stay still counts as a
            base move in the drift bookkeeping).
    RSA  -- robber flees away from the cop: on the base, a uniformly random
            base neighbor that increases the distance; inside a copy, a
            uniformly random neighbor off the path to the cop.
    RSB  -- robber heads for the base tree: backtracks out of copies, and
            flees like RSA while on the base.
    """

    kind: str
    side: str = field(init=False)

    def __post_init__(self) -> None:
        sides = {"CS": COP, "CSB": COP, "RSA": ROBBER, "RSB": ROBBER}
        if self.kind not in sides:
            raise ValueError(f"unknown tree strategy {self.kind!r}")
        object.__setattr__(self, "side", sides[self.kind])


def cs() -> TreeStrategy:
    return TreeStrategy("CS")


def csb() -> TreeStrategy:
    return TreeStrategy("CSB")


def rsa() -> TreeStrategy:
    return TreeStrategy("RSA")


def rsb() -> TreeStrategy:
    return TreeStrategy("RSB")


# --- address-level moves (definitional ground truth) ---------------------------

def _base_geodesic_step(word: tuple, target: tuple) -> tuple:
    """One step along the base tree from `word` toward `target`."""
    p = _common_prefix(word, target)
    if len(word) > p:
        return word[:-1]  # retreat toward the fork
    return word + (target[p],)


def _check_u(u: float) -> None:
    if not 0 <= u < 1:
        raise ValueError(f"uniform draw must lie in [0, 1), got {u}")


def _uniform_choice(items: list, u: float):
    _check_u(u)
    return items[min(int(u * len(items)), len(items) - 1)]


def sober_move_tree(
    tree: TreeParams, strategy: TreeStrategy, state: TreeGameState, u: float
) -> TreeGameState:
    """Apply one deliberate move of the strategy's player.

    Deterministic strategies ignore u; the fleeing robber consumes it to pick
    uniformly among its admissible moves.  Raises if called on a captured
    state (no round is played after capture).
    """
    if state.captured:
        raise ValueError("no moves are played after capture")
    cop, robber = state.cop, state.robber
    if strategy.kind == "CS":
        step = next(
            n for n in neighbors(tree, cop) if distance(n, robber) == distance(cop, robber) - 1
        )
        return TreeGameState(cop=step, robber=robber)
    if strategy.kind == "CSB":
        if not cop.on_base:
            return TreeGameState(
                cop=TreeVertex(cop.base_path, cop.small_path[:-1]), robber=robber
            )
        if cop.base_path != robber.base_path:
            stepped = _base_geodesic_step(cop.base_path, robber.base_path)
            return TreeGameState(cop=TreeVertex(stepped, ()), robber=robber)
        return state  # same copy: opt to stay
    if strategy.kind == "RSA":
        if robber.on_base:
            options = [
                TreeVertex(base_step(robber.base_path, letter), ())
                for letter in range(tree.Delta - 1)
            ]
            options = [n for n in options if distance(n, cop) > distance(robber, cop)]
        else:
            options = [
                n for n in neighbors(tree, robber) if distance(n, cop) > distance(robber, cop)
            ]
        return TreeGameState(cop=cop, robber=_uniform_choice(options, u))
    # RSB
    if robber.on_base:
        options = [
            TreeVertex(base_step(robber.base_path, letter), ())
            for letter in range(tree.Delta - 1)
        ]
        options = [n for n in options if distance(n, cop) > distance(robber, cop)]
        return TreeGameState(cop=cop, robber=_uniform_choice(options, u))
    return TreeGameState(
        cop=cop, robber=TreeVertex(robber.base_path, robber.small_path[:-1])
    )


def tipsy_move_tree(
    tree: TreeParams, state: TreeGameState, mover: str, u: float
) -> TreeGameState:
    """Stumble to a uniformly random neighbor of the mover."""
    if state.captured:
        raise ValueError("no moves are played after capture")
    if mover == COP:
        target = _uniform_choice(neighbors(tree, state.cop), u)
        return TreeGameState(cop=target, robber=state.robber)
    if mover == ROBBER:
        target = _uniform_choice(neighbors(tree, state.robber), u)
        return TreeGameState(cop=state.cop, robber=target)
    raise ValueError(f"mover must be 'cop' or 'robber', got {mover!r}")


# --- lumped pair-state dynamics -------------------------------------------------
#
# The four-number summary (base_gap, cop_depth, robber_depth, shared) is the
# base distance between projections, each player's depth in its copy, and the
# length of the common copy path -- meaningful (and only tracked) when
# base_gap == 0 and both players sit over the same base vertex.  Every
# strategy above depends on the pair state only through this summary, so the
# summary evolves as a Markov chain; capture is base_gap == 0 with
# cop_depth == robber_depth == shared.

def reduce_state(state: TreeGameState) -> tuple:
    """Project a pair of addresses to the (base_gap, a, b, shared) summary."""
    cop, robber = state.cop, state.robber
    p = _common_prefix(cop.base_path, robber.base_path)
    base_gap = (len(cop.base_path) - p) + (len(robber.base_path) - p)
    a, b = cop.depth, robber.depth
    shared = _common_prefix(cop.small_path, robber.small_path) if base_gap == 0 else 0
    return (base_gap, a, b, shared)


def summary_distance(summary: tuple) -> int:
    base_gap, a, b, shared = summary
    if base_gap == 0:
        return a + b - 2 * shared
    return base_gap + a + b


def summary_captured(summary: tuple) -> bool:
    base_gap, a, b, shared = summary
    return base_gap == 0 and a == b == shared


#: Outcome record for one base-tree move: (sign, lower_bound_sign).
#: sign is the actual change of the projected distance (+1 for a stay, by
#: the tie rule); lower_bound_sign is the coupled i.i.d. comparison value.


def summary_sober_move(
    tree: TreeParams, kind: str, summary: tuple, u: float
) -> tuple:
    """One deliberate move on the summary chain.

    Returns (new_summary, base_move) where base_move is None or the
    (sign, lower_bound_sign) pair of a recorded base-tree move.
    """
    base_gap, a, b, shared = summary
    Delta, delta = tree.Delta, tree.delta
    if kind == "CS":
        if base_gap > 0:
            if a >= 1:
                return (base_gap, a - 1, b, 0), None
            new_gap = base_gap - 1
            return (new_gap, 0, b, 0), (-1, -1)
        if a > shared:
            return (0, a - 1, b, shared), None
        return (0, a + 1, b, shared + 1), None
    if kind == "CSB":
        if a >= 1:
            new_shared = min(shared, a - 1) if base_gap == 0 else 0
            return (base_gap, a - 1, b, new_shared), None
        if base_gap > 0:
            return (base_gap - 1, 0, b, 0), (-1, -1)
        return summary, (+1, -1)  # stay put; ties record as non-decreasing
    if kind == "RSA":
        _check_u(u)
        if b == 0:
            # every admissible base move puts one more edge between projections,
            # so the uniform pick does not change the summary
            return (base_gap + 1, a, 0, 0), (+1, +1)
        if base_gap == 0 and shared == b and a > b:
            # cop blocks one child; parent plus the delta - 2 other children remain
            pick = min(int(u * (delta - 1)), delta - 2)
            if pick == 0:
                return (0, a, b - 1, b - 1), None
            return (0, a, b + 1, shared), None
        return (base_gap, a, b + 1, shared if base_gap == 0 else 0), None
    if kind == "RSB":
        _check_u(u)
        if b == 0:
            return (base_gap + 1, a, 0, 0), (+1, +1)
        new_shared = min(shared, b - 1) if base_gap == 0 else 0
        return (base_gap, a, b - 1, new_shared), None
    raise ValueError(f"unknown tree strategy {kind!r}")


def summary_tipsy_move(
    tree: TreeParams, summary: tuple, mover: str, u: float
) -> tuple:
    """One stumble on the summary chain; returns (new_summary, base_move)."""
    base_gap, a, b, shared = summary
    Delta, delta = tree.Delta, tree.delta
    own = a if mover == COP else b
    other = b if mover == COP else a

    def build(gap, own_depth, new_shared):
        if mover == COP:
            return (gap, own_depth, b, new_shared)
        return (gap, a, own_depth, new_shared)

    _check_u(u)
    # lower-bound sign convention, both players: -1 exactly when the stumble
    # takes the slot pointing at the other player's projection
    if own == 0:
        slot = min(int(u * Delta), Delta - 1)
        if slot == Delta - 1:  # into the mover's own copy
            new_shared = 0
            if base_gap == 0 and other >= 1:
                new_shared = 1
            return build(base_gap, 1, new_shared), None
        if slot == 0:  # toward the other player's projection (if any gap)
            if base_gap == 0:
                return build(1, 0, 0), (+1, -1)
            return build(base_gap - 1, 0, 0), (-1, -1)
        # slots 1..Delta-2: away along the base
        return build(base_gap + 1, 0, 0), (+1, +1)
    slot = min(int(u * delta), delta - 1)
    if slot == 0:  # climb toward the base
        new_depth = own - 1
        new_shared = min(shared, new_depth) if base_gap == 0 else 0
        return build(base_gap, new_depth, new_shared), None
    # deeper into the copy; slot 1 is the branch that tracks the other
    # player's path whenever that is possible at all
    can_match = base_gap == 0 and shared == own and other > own
    new_shared = shared
    if can_match and slot == 1:
        new_shared = shared + 1
    return build(base_gap, own + 1, new_shared), None


@dataclass
class TreeEpisodeStats:
    """Base-move bookkeeping accumulated over one episode.

    Signs follow the projected-distance convention: +1 when the recorded
    move increased the base distance between the players' projections (a
    stay by the base-pursuit cop also records +1), -1 when it decreased.
    lower_* are the coupled comparison variables, which may undershoot the
    recorded sign only while the projections coincide.
    """

    robber_base_moves: int = 0
    cop_base_moves: int = 0
    sum_sign_robber: int = 0
    sum_sign_cop: int = 0
    sum_lower_robber: int = 0
    sum_lower_cop: int = 0
    domination_violations: int = 0
    separated_mismatches: int = 0
    last_robber_move_round: int = 0
    completed_gaps: int = 0
    sum_gap: int = 0
    sum_gap_sq: int = 0
    max_cop_depth: int = 0
    max_robber_depth: int = 0
    sum_cop_depth: int = 0
    sum_robber_depth: int = 0
    drift: int = 0  # running sum of every recorded sign, both players
    robber_move_times: list | None = None
    robber_move_signs: list | None = None
    robber_move_lowers: list | None = None
    cop_move_times: list | None = None
    cop_move_signs: list | None = None
    cop_move_lowers: list | None = None


def start_on_base(separation: int) -> TreeGameState:
    """Both players on the base tree, the given distance apart."""
    if separation < 1:
        raise ValueError(f"separation must be >= 1, got {separation}")
    word = tuple((0, 1) * ((separation + 1) // 2))[:separation]
    return TreeGameState(cop=TreeVertex((), ()), robber=TreeVertex(word, ()))


def run_tree_episode(
    tree: TreeParams,
    params: GameParams,
    cop_strategy: TreeStrategy,
    robber_strategy: TreeStrategy,
    start: TreeGameState,
    horizon: int,
    rng: RngStream,
    record_detail: bool = False,
) -> EpisodeReport:
    """Play one episode on the summary chain and report the outcome.

    Consumes exactly two uniforms per round (spinner, then move) from the
    stream, mirroring the grid loop; the compiled kernels replay identical
    trajectories for the same stream.  The returned report carries a
    TreeEpisodeStats in tree_stats.
    """
    validate(params)
    if params.mode != TREE:
        raise ValueError(f"tree episode needs mode='tree' params, got {params.mode!r}")
    if cop_strategy.side != COP or robber_strategy.side != ROBBER:
        raise ValueError("run_tree_episode needs one cop and one robber strategy")
    validate_vertex(tree, start.cop)
    validate_vertex(tree, start.robber)
    if start.captured:
        raise ValueError("start state is already captured")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")

    stats = TreeEpisodeStats()
    if record_detail:
        stats.robber_move_times = []
        stats.robber_move_signs = []
        stats.robber_move_lowers = []
        stats.cop_move_times = []
        stats.cop_move_signs = []
        stats.cop_move_lowers = []

    summary = reduce_state(start)
    gen = rng.generator()
    captured = False
    capture_time = None
    steps = 0
    for step in range(1, horizon + 1):
        steps = step
        u1 = gen.random()
        u2 = gen.random()
        outcome = spin(params, u1)
        before_gap = summary[0]
        if outcome is SpinnerOutcome.SOBER_COP:
            mover = COP
            summary, base_move = summary_sober_move(tree, cop_strategy.kind, summary, u2)
        elif outcome is SpinnerOutcome.SOBER_ROBBER:
            mover = ROBBER
            summary, base_move = summary_sober_move(
                tree, robber_strategy.kind, summary, u2
            )
        elif outcome is SpinnerOutcome.TIPSY_COP:
            mover = COP
            summary, base_move = summary_tipsy_move(tree, summary, COP, u2)
        else:
            mover = ROBBER
            summary, base_move = summary_tipsy_move(tree, summary, ROBBER, u2)

        if base_move is not None:
            sign, lower = base_move
            stats.drift += sign
            if sign < lower:
                stats.domination_violations += 1
            if before_gap > 0 and sign != lower:
                stats.separated_mismatches += 1
            if mover == ROBBER:
                stats.robber_base_moves += 1
                stats.sum_sign_robber += sign
                stats.sum_lower_robber += lower
                gap = step - stats.last_robber_move_round
                stats.completed_gaps += 1
                stats.sum_gap += gap
                stats.sum_gap_sq += gap * gap
                stats.last_robber_move_round = step
                if record_detail:
                    stats.robber_move_times.append(step)
                    stats.robber_move_signs.append(sign)
                    stats.robber_move_lowers.append(lower)
            else:
                stats.cop_base_moves += 1
                stats.sum_sign_cop += sign
                stats.sum_lower_cop += lower
                if record_detail:
                    stats.cop_move_times.append(step)
                    stats.cop_move_signs.append(sign)
                    stats.cop_move_lowers.append(lower)

        stats.max_cop_depth = max(stats.max_cop_depth, summary[1])
        stats.max_robber_depth = max(stats.max_robber_depth, summary[2])
        stats.sum_cop_depth += summary[1]
        stats.sum_robber_depth += summary[2]

        if summary_captured(summary):
            captured = True
            capture_time = step
            break

    return EpisodeReport(
        captured=captured,
        capture_time=capture_time,
        steps_run=steps,
        final_distance=summary_distance(summary),
        tree_stats=stats,
    )
