"""Closed-form classifiers for the chase game.

Everything in this module is exact arithmetic on the game parameters: walk
classifications, expected hitting times, the reversible weight model for the
folded grid walk, the two-round drift of the foolish cop, and the tree-game
drift bookkeeping (base-return times, drift margins, threshold curve and the
strategy crossover point).  No simulation happens here; the Monte Carlo
engine and the chain oracle are the independent checks on these formulas.

Each public classifier carries a `rationale` tag (e.g. "analytic:drift-margin")
naming the mechanism behind the verdict; the CLI propagates these tags as the
provenance of every analytic number it prints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .spinner import GRID, GameParams, validate

#: Tolerance for classifying a parameter point as sitting on a boundary.
BOUNDARY_TOL = 1e-12

#: Residual tolerance for the bisection root-finder on the threshold curve.
BISECT_TOL = 1e-13


class WalkClass(enum.Enum):
    TRANSIENT = "Transient"
    NULL_RECURRENT = "NullRecurrent"
    POSITIVE_RECURRENT = "PositiveRecurrent"


class Winner(enum.Enum):
    COP_AS = "CopAS"                       # cop wins almost surely
    ROBBER_POSITIVE_PROB = "RobberPositiveProb"  # robber escapes forever w.p. > 0
    BOUNDARY = "Boundary"                  # on a critical curve / not decided


@dataclass(frozen=True)
class RegimeVerdict:
    """A winner classification plus the mechanism that produced it."""

    winner: Winner
    rationale: str
    walk_class: WalkClass | None = None
    detail: str = ""


# --- one-dimensional biased-walk arithmetic -----------------------------------

def gamblers_ruin_class(p) -> WalkClass:
    """Classify the walk on {0,1,2,...} that steps +1 w.p. p and -1 w.p. 1-p.

    Transient for p > 1/2 (positive escape probability), null recurrent at
    p = 1/2 (hits 0 almost surely, infinite mean time), positive recurrent
    for p < 1/2 (mean hitting time of 0 from n is n/(1-2p)).
    """
    if not 0 <= p <= 1:
        raise ValueError(f"step-up probability must be in [0, 1], got {p}")
    if p > 0.5 + BOUNDARY_TOL:
        return WalkClass.TRANSIENT
    if p >= 0.5 - BOUNDARY_TOL:
        return WalkClass.NULL_RECURRENT
    return WalkClass.POSITIVE_RECURRENT


def hitting_time_moments(p_list, p) -> tuple[float, float]:
    """Mean and variance of the time for the walk to step from 1 down to 0.

    The walk moves up with probability p from every state, except that state
    i (1-based) uses the override p_list[i-1] instead.  Conditioning on the
    first step gives, with T_i the passage time from i to i-1,

        E[T_i]   = (1 + p_i E[T_{i+1}]) / (1 - p_i)
        E[T_i^2] = (1 + 2 p_i (E[T_{i+1}] + E[T_i])
                      + p_i (E[T_{i+1}^2] + 2 E[T_{i+1}] E[T_i])) / (1 - p_i)

    solved backwards from the homogeneous tail.  Requires p < 1/2 (otherwise
    the mean is infinite) and every override in [0, 1).
    """
    if not 0 <= p < 0.5:
        raise ValueError(
            f"tail step-up probability must be in [0, 1/2) for finite moments, got {p}"
        )
    for i, pi in enumerate(p_list, start=1):
        if not 0 <= pi < 1:
            raise ValueError(
                f"override probability at state {i} must be in [0, 1), got {pi}"
            )

    # homogeneous tail: fixed point of the same one-step recursion
    mean = 1 / (1 - 2 * p)
    second = (1 + 4 * p * mean + 2 * p * mean * mean) / (1 - 2 * p)

    for pi in reversed(list(p_list)):
        m_next, s_next = mean, second
        mean = (1 + pi * m_next) / (1 - pi)
        second = (1 + 2 * pi * (m_next + mean) + pi * (s_next + 2 * m_next * mean)) / (
            1 - pi
        )
    return mean, second - mean * mean


# --- grid game ----------------------------------------------------------------

@dataclass(frozen=True)
class WeightModel:
    """Reversible edge-weight model for the folded grid walk (pursuit cop
    mixing with probability p_star on the diagonal, against the fleeing
    robber).

    Vertical edges at height y carry weight beta**y, horizontal edges at
    height y carry alpha * beta**(y-1); transition probabilities are edge
    weight over vertex weight sum.  Total weight is finite iff beta < 1,
    i.e. iff the cop is strictly soberer than the robber.
    """

    beta: float   # up/down weight ratio (r + t/4) / (c + t/4)
    alpha: float  # sideways/down weight ratio (t/4) / (c + t/4)
    p_star: float  # diagonal mixing probability making the walk reversible

    @property
    def sigma_vertical(self) -> float:
        """Sum of vertical weights along a column, (beta+1)/(beta-1)^2."""
        return (self.beta + 1) / (self.beta - 1) ** 2

    @property
    def sigma_horizontal(self) -> float:
        """Sum of horizontal weights along a column, 2*alpha/(beta-1)^2."""
        return 2 * self.alpha / (self.beta - 1) ** 2


def grid_weight_model(params: GameParams) -> WeightModel:
    """Weight model of the folded difference walk; needs a soberer cop (c > r).

    The diagonal mixing probability solves the detailed-balance condition
    p*c + t/2 = t / (2(2r + t)); with c <= r no choice of weights makes the
    walk reversible with summable weights, so that is an error.
    """
    validate(params)
    c, r, t = params.c, params.r, params.t
    if not c > r:
        raise ValueError(
            f"weight model requires a strictly soberer cop (c > r), got c={c}, r={r}"
        )
    denom_down = c + t / 4
    beta = (r + t / 4) / denom_down
    alpha = (t / 4) / denom_down
    if 2 * r + t == 0:  # degenerate c = 1 corner; continuity limit of the ratio
        p_star = 0.5
    else:
        p_star = t * (c - r) / (2 * c * (2 * r + t))
    return WeightModel(beta=beta, alpha=alpha, p_star=p_star)


def grid_regime(params: GameParams) -> RegimeVerdict:
    """Who wins on the grid: decided entirely by comparing c with r.

    A strictly soberer robber escapes with positive probability; a strictly
    soberer cop captures almost surely in finite expected time (the folded
    walk has summable reversible weights); equal sobriety still means almost
    sure capture, but the walk is null recurrent so the expected capture
    time is infinite.
    """
    validate(params)
    if params.mode != GRID:
        raise ValueError(f"grid_regime needs mode='grid' params, got {params.mode!r}")
    c, r = params.c, params.r
    if r > c + BOUNDARY_TOL:
        return RegimeVerdict(
            winner=Winner.ROBBER_POSITIVE_PROB,
            rationale="analytic:drift-comparison",
            walk_class=WalkClass.TRANSIENT,
            detail="soberer robber: outward drift beats any cop strategy",
        )
    if c > r + BOUNDARY_TOL:
        return RegimeVerdict(
            winner=Winner.COP_AS,
            rationale="analytic:weight-sum-recurrence",
            walk_class=WalkClass.POSITIVE_RECURRENT,
            detail="soberer cop: folded walk positive recurrent, finite expected capture time",
        )
    return RegimeVerdict(
        winner=Winner.COP_AS,
        rationale="analytic:weight-sum-recurrence",
        walk_class=WalkClass.NULL_RECURRENT,
        detail="equal sobriety: capture is almost sure but takes infinite expected time",
    )


@dataclass(frozen=True)
class FoolishMargin:
    """Exact two-round drift of max(|x|,|y|) when a foolish cop chases the
    fleeing robber, for the two recurring far-state classes."""

    axis_drift: float      # from states (0, y), y >= 2
    off_axis_drift: float  # from states (+-1, y), y >= 2

    @property
    def margin(self) -> float:
        """Worst-case (minimum) of the two drifts; the robber escapes with
        positive probability whenever this is positive."""
        return min(self.axis_drift, self.off_axis_drift)


def foolish_margin(params: GameParams) -> FoolishMargin:
    """Closed-form two-round drifts against the foolish cop.

    axis:     2r^2 + 2rt - (3/2)ct - 2c^2
    off-axis: 2r^2 + 2rt + 2rc - c^2 - ct/4

    Both stay positive on a band of parameters with c > r, which is what
    makes the foolish cop lose games that a pursuit cop wins.  Exact in
    Fraction arithmetic when the parameters are Fractions.
    """
    validate(params)
    c, r, t = params.c, params.r, params.t
    axis = 2 * r * r + 2 * r * t - 3 * c * t / 2 - 2 * c * c
    off_axis = 2 * r * r + 2 * r * t + 2 * r * c - c * c - c * t / 4
    return FoolishMargin(axis_drift=axis, off_axis_drift=off_axis)


# --- tree game ----------------------------------------------------------------

def _check_tree_shape(delta: int, Delta: int) -> None:
    if int(delta) != delta or int(Delta) != Delta:
        raise ValueError(f"tree degrees must be integers, got delta={delta}, Delta={Delta}")
    if delta < 2:
        raise ValueError(f"small-tree degree delta must be >= 2, got {delta}")
    if Delta < 3:
        raise ValueError(f"base degree Delta must be >= 3, got {Delta}")
    if Delta < delta:
        raise ValueError(f"need Delta >= delta, got Delta={Delta} < delta={delta}")


def _check_tipsiness(name: str, value) -> None:
    if not 0 <= value <= 0.5:
        raise ValueError(f"{name} must lie in [0, 1/2] (half-split play), got {value}")


def small_tree_ceiling(delta: int) -> float:
    """delta/(4*delta - 4): above this tipsiness a walker in a small-tree copy
    drifts away from the base tree and almost surely never returns."""
    return delta / (4 * delta - 4)


def base_tree_ceiling(Delta: int) -> float:
    """Delta/(4*Delta - 6): above this cop tipsiness the cop's base-tree
    bookkeeping drifts the wrong way even while walking on the base tree."""
    return Delta / (4 * Delta - 6)


def regular_tree_regime(delta: int, t_c, t_r) -> RegimeVerdict:
    """Winner on the plain delta-regular tree (pursuit cop vs fleeing robber).

    The cop-robber distance is a birth-death walk whose step-up probability
    is r + (t_c + t_r)(delta-1)/delta; with the half-split r = 1/2 - t_r this
    is at most 1/2 exactly when t_r >= t_c (delta - 1).  At equality the
    distance walk is null recurrent: capture still almost sure, infinite
    expected time.
    """
    if int(delta) != delta or delta < 2:
        raise ValueError(f"regular tree needs an integer degree delta >= 2, got {delta}")
    _check_tipsiness("t_c", t_c)
    _check_tipsiness("t_r", t_r)
    gap = t_r - t_c * (delta - 1)
    up = (0.5 - t_r) + (t_c + t_r) * (delta - 1) / delta
    if gap > BOUNDARY_TOL:
        return RegimeVerdict(
            winner=Winner.COP_AS,
            rationale="analytic:regular-tree-ruin",
            walk_class=WalkClass.POSITIVE_RECURRENT,
            detail=f"distance walk steps up w.p. {up:.6g} < 1/2",
        )
    if gap >= -BOUNDARY_TOL:
        return RegimeVerdict(
            winner=Winner.COP_AS,
            rationale="analytic:regular-tree-ruin",
            walk_class=WalkClass.NULL_RECURRENT,
            detail="distance walk is balanced: capture almost sure, infinite mean time",
        )
    return RegimeVerdict(
        winner=Winner.ROBBER_POSITIVE_PROB,
        rationale="analytic:regular-tree-ruin",
        walk_class=WalkClass.TRANSIENT,
        detail=f"distance walk steps up w.p. {up:.6g} > 1/2",
    )


def mu(t, delta: int, Delta: int) -> float:
    """Expected number of rounds between consecutive base-tree moves of a
    base-seeking walker with tipsiness t on X(Delta, delta).

    Rational form of the excursion sum; defined only for
    t < delta/(4*delta-4), beyond which excursions into a small-tree copy
    have positive probability of never returning.  mu(0) = 2 (a sober
    base-seeking walker moves every other round on average).
    """
    _check_tree_shape(delta, Delta)
    if not 0 <= t <= 0.5:
        raise ValueError(f"tipsiness must lie in [0, 1/2], got {t}")
    ceiling = small_tree_ceiling(delta)
    if t >= ceiling:
        raise ValueError(
            f"mean base-return time is infinite for t >= delta/(4delta-4) = "
            f"{ceiling:.6g}, got t={t}"
        )
    num = 2 * delta * Delta - (8 * delta * Delta - 4 * delta - 8 * Delta) * t
    den = (delta - 4 * (delta - 1) * t) * (Delta - 2 * t)
    return num / den


def _mu_excursion_form(t, delta: int, Delta: int) -> float:
    """Equivalent product form of `mu`, kept separate so tests can confirm
    the two printed expressions define the same function."""
    a = (4 * delta - 4) / delta
    d = a - 2 / Delta
    return 2 * (1 - d * t) / ((1 - a * t) * (1 - 2 * t / Delta))


def _drift_factor(t, b_second, delta: int, Delta: int):
    """(1 - a t)(1 - b t)/(1 - d t): per-base-move drift bound divided by the
    base-move rate, the building block of the margin function."""
    a = (4 * delta - 4) / delta
    d = a - 2 / Delta
    return (1 - a * t) * (1 - b_second * t) / (1 - d * t)


def rsb_margin(t_r, t_c, delta: int, Delta: int) -> float:
    """Drift margin of the base-seeking robber against the base-seeking cop.

    Positive values mean the robber's base-tree distance bookkeeping drifts
    outward fast enough to escape any cop; negative values mean the
    base-seeking cop closes in almost surely.  Only defined on the box
    0 <= t_r <= delta/(4delta-4), 0 <= t_c <= min(delta/(4delta-4),
    Delta/(4Delta-6)); outside it the excursion rates behind the formula are
    infinite and this raises.
    """
    _check_tree_shape(delta, Delta)
    _check_tipsiness("t_r", t_r)
    _check_tipsiness("t_c", t_c)
    xmax = small_tree_ceiling(delta)
    ymax = min(xmax, base_tree_ceiling(Delta))
    if t_r > xmax:
        raise ValueError(f"rsb_margin needs t_r <= {xmax:.6g}, got {t_r}")
    if t_c > ymax:
        raise ValueError(f"rsb_margin needs t_c <= {ymax:.6g}, got {t_c}")
    return _drift_factor(t_r, 6 / Delta, delta, Delta) - _drift_factor(
        t_c, (4 * Delta - 6) / Delta, delta, Delta
    )


def threshold_f(t_r, delta: int, Delta: int) -> float:
    """Critical cop tipsiness: the base-seeking robber escapes iff
    t_c > threshold_f(t_r) (strictly below it the base-seeking cop wins).

    Defined for Delta >= 4 on t_r in [0, delta/(4delta-4)].  Computed by
    bisection on the margin function, which is monotone increasing in t_c on
    the box; endpoints f(0) = 0 and f(xmax) = min(xmax, Delta/(4Delta-6))
    are exact, and f'(0) = 2/(Delta-1).
    """
    _check_tree_shape(delta, Delta)
    if Delta < 4:
        raise ValueError(
            f"threshold curve is unsupported for Delta < 4, got Delta={Delta}"
        )
    _check_tipsiness("t_r", t_r)
    xmax = small_tree_ceiling(delta)
    ymax = min(xmax, base_tree_ceiling(Delta))
    if t_r > xmax:
        raise ValueError(f"threshold_f needs t_r <= {xmax:.6g}, got {t_r}")
    if t_r == 0:
        return 0.0
    if t_r == xmax:
        return ymax

    target = _drift_factor(t_r, 6 / Delta, delta, Delta)

    def g(y):
        return target - _drift_factor(y, (4 * Delta - 6) / Delta, delta, Delta)

    lo, hi = 0.0, ymax  # g(lo) <= 0 <= g(hi), g increasing in y
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < BISECT_TOL:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossover_t0(delta: int, Delta: int) -> float:
    """Robber tipsiness at which the better fleeing strategy switches.

    Below t0 a copy-diving robber (base-seeking bookkeeping) wins whenever
    the base-fleeing robber does; above t0 the reverse holds.  Equals 1/2
    for delta = 2, equals 0 when 2*delta >= Delta + 1, and otherwise is the
    unique root of margin(x, x/(delta-1)) = 0 inside (0, delta/(4delta-4)),
    found exactly: clearing denominators leaves a cubic with a root at zero,
    and the deflated quadratic is expanded in Fraction arithmetic.
    """
    _check_tree_shape(delta, Delta)
    if Delta < 4:
        raise ValueError(
            f"crossover point is unsupported for Delta < 4, got Delta={Delta}"
        )
    if delta == 2:
        return 0.5
    if 2 * delta >= Delta + 1:
        return 0.0

    a = Fraction(4 * delta - 4, delta)
    b_r = Fraction(6, Delta)
    b_c = Fraction(4 * Delta - 6, Delta)
    d = a - Fraction(2, Delta)
    s = Fraction(1, delta - 1)  # the comparison line t_c = t_r/(delta-1)

    def poly_mul(p, q):
        out = [Fraction(0)] * (len(p) + len(q) - 1)
        for i, pi in enumerate(p):
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
        return out

    # margin(x, s x) * (1 - d x)(1 - d s x) = N(x), a cubic with N(0) = 0
    left = poly_mul(poly_mul([1, -a], [1, -b_r]), [1, -d * s])
    right = poly_mul(poly_mul([1, -a * s], [1, -b_c * s]), [1, -d])
    n = [le - ri for le, ri in zip(left, right)]
    assert n[0] == 0, "cubic must vanish at zero"
    c0, c1, c2 = n[1], n[2], n[3]  # deflated quadratic c2 x^2 + c1 x + c0

    xmax = delta / (4 * delta - 4)
    if c2 == 0:
        root = float(-c0 / c1)
        return root
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        raise ArithmeticError("crossover quadratic has no real root; unreachable")
    sq = math.sqrt(float(disc))
    roots = [float((-c1 - sq_) / (2 * c2)) for sq_ in (sq, -sq)]
    inside = [x for x in roots if 0 < x < xmax]
    if len(inside) != 1:
        raise ArithmeticError(
            f"expected exactly one crossover root in (0, {xmax:.6g}), got {roots}"
        )
    return inside[0]


def tree_regime(t_r, t_c, delta: int, Delta: int) -> tuple[RegimeVerdict, RegimeVerdict]:
    """Verdicts for the two fleeing strategies on X(Delta, delta).

    Returns (copy-diving robber verdict, base-seeking robber verdict), each a
    RegimeVerdict.  Equalities within tolerance of a critical curve are
    reported as Boundary, as is the region t_r > delta/(4delta-4) with cop
    tipsiness between the pursuit bound and the too-tipsy bound, which no
    analytic result decides.
    """
    _check_tree_shape(delta, Delta)
    _check_tipsiness("t_r", t_r)
    _check_tipsiness("t_c", t_c)
    tol = BOUNDARY_TOL
    xmax = small_tree_ceiling(delta)
    ymax = min(xmax, base_tree_ceiling(Delta))
    dominance = "analytic:strategy-dominance"

    if t_c <= tol:
        verdict = RegimeVerdict(
            winner=Winner.COP_AS,
            rationale=dominance,
            detail="fully sober cop: the distance never drifts the robber's way",
        )
        return verdict, verdict
    if t_r <= tol:
        verdict = RegimeVerdict(
            winner=Winner.ROBBER_POSITIVE_PROB,
            rationale=dominance,
            detail="fully sober robber vs tipsy cop: outward drift wins",
        )
        return verdict, verdict

    pursuit_bound = min(t_r / (delta - 1), base_tree_ceiling(Delta))

    # copy-diving robber: exact threshold at t_c = pursuit_bound
    if t_c > pursuit_bound + tol:
        rsa = RegimeVerdict(
            winner=Winner.ROBBER_POSITIVE_PROB,
            rationale=dominance,
            detail="cop too tipsy to pin the robber inside one copy",
        )
    elif t_r < 0.5 - tol:
        rsa = RegimeVerdict(
            winner=Winner.COP_AS,
            rationale=dominance,
            detail="pursuit cop corners the copy-diving robber",
        )
    else:
        rsa = RegimeVerdict(
            winner=Winner.BOUNDARY,
            rationale=dominance,
            detail="robber fully tipsy (t_r = 1/2): outside the analysis",
        )

    # base-seeking robber
    if t_c > ymax + tol:
        rsb = RegimeVerdict(
            winner=Winner.ROBBER_POSITIVE_PROB,
            rationale=dominance,
            detail="cop tipsiness above the too-tipsy ceiling",
        )
    elif t_r <= xmax + tol:
        margin = rsb_margin(min(t_r, xmax), min(t_c, ymax), delta, Delta)
        if margin > tol:
            rsb = RegimeVerdict(
                winner=Winner.ROBBER_POSITIVE_PROB,
                rationale="analytic:drift-margin",
                detail=f"drift margin {margin:.6g} > 0",
            )
        elif margin < -tol:
            rsb = RegimeVerdict(
                winner=Winner.COP_AS,
                rationale="analytic:drift-margin",
                detail=f"drift margin {margin:.6g} < 0",
            )
        else:
            rsb = RegimeVerdict(
                winner=Winner.BOUNDARY,
                rationale="analytic:drift-margin",
                detail="on the critical threshold curve",
            )
    elif t_c <= pursuit_bound + tol:
        rsb = RegimeVerdict(
            winner=Winner.COP_AS,
            rationale=dominance,
            detail="robber too tipsy to reach the base tree; pursuit cop wins",
        )
    else:
        rsb = RegimeVerdict(
            winner=Winner.BOUNDARY,
            rationale=dominance,
            detail="no analytic result covers this corner of parameter space",
        )
    return rsa, rsb
