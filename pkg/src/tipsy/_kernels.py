"""Compiled per-episode simulation kernels.

Each kernel replays exactly the trajectory of the pure-python episode runner
for the same RngStream: two uniforms per round (spinner, then move), the same
spinner threshold arithmetic, the same uniform-to-move tables.  Bit-identical
agreement with the reference loops is enforced by tests, which is why these
functions are written as literal transcriptions rather than clever rewrites.

All kernels release the GIL, so a thread pool scales them across cores while
episode k always consumes stream k -- results never depend on the pool size.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# strategy codes shared with the engine
GRID_COP_CS1 = 0
GRID_COP_CS2 = 1
GRID_COP_FOOLISH = 2
GRID_ROBBER_RS = 0
GRID_ROBBER_RS_MIN = 1
TREE_COP_CS = 0
TREE_COP_CSB = 1
TREE_ROBBER_RSA = 0
TREE_ROBBER_RSB = 1

# layout of the int64 record returned by tree_episode_kernel
TREE_REC_LEN = 23
(
    REC_CAPTURED,
    REC_CAPTURE_TIME,
    REC_GAP,
    REC_A,
    REC_B,
    REC_SHARED,
    REC_ROBBER_MOVES,
    REC_COP_MOVES,
    REC_SUM_SIGN_R,
    REC_SUM_SIGN_C,
    REC_SUM_LOWER_R,
    REC_SUM_LOWER_C,
    REC_DOMINATION,
    REC_SEPARATED,
    REC_LAST_ROBBER_MOVE,
    REC_SUM_GAP,
    REC_SUM_GAP_SQ,
    REC_MAX_A,
    REC_MAX_B,
    REC_SUM_A,
    REC_SUM_B,
    REC_DRIFT,
    REC_STEPS,
) = range(TREE_REC_LEN)


@njit(cache=True, nogil=True)
def _sign(v):
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


@njit(cache=True, nogil=True)
def grid_episode_kernel(c, r, t_c, cop_kind, cop_p, robber_kind, x0, y0, horizon, gen):
    """One grid episode; returns (captured, capture_time, steps, x, y)."""
    x = x0
    y = y0
    for step in range(1, horizon + 1):
        u1 = gen.random()
        u2 = gen.random()
        if u1 < c:
            # sober cop
            ax = abs(x)
            ay = abs(y)
            if cop_kind == GRID_COP_CS1:
                if ax > ay:
                    x -= _sign(x)
                else:
                    y -= _sign(y)
            elif cop_kind == GRID_COP_CS2:
                if ax != ay:
                    if ax > ay:
                        x -= _sign(x)
                    else:
                        y -= _sign(y)
                elif u2 < cop_p:
                    y -= _sign(y)
                else:
                    y += _sign(y)
            else:  # foolish: shrink the smaller nonzero coordinate
                if ax == ay:
                    x -= _sign(x)
                elif ax < ay:
                    if x != 0:
                        x -= _sign(x)
                    else:
                        y -= _sign(y)
                elif y != 0:
                    y -= _sign(y)
                else:
                    x -= _sign(x)
        elif u1 < c + r:
            # sober robber
            ax = abs(x)
            ay = abs(y)
            if robber_kind == GRID_ROBBER_RS:
                if ax > ay:
                    x += _sign(x)
                else:
                    y += _sign(y)
            else:  # RS_MIN: push the smaller coordinate, zeros move positive
                if ay < ax:
                    s = _sign(y)
                    if s == 0:
                        s = 1
                    y += s
                else:
                    s = _sign(x)
                    if s == 0:
                        s = 1
                    x += s
        else:
            idx = int(u2 * 4)
            if idx == 0:
                dx, dy = 1, 0
            elif idx == 1:
                dx, dy = -1, 0
            elif idx == 2:
                dx, dy = 0, 1
            else:
                dx, dy = 0, -1
            if u1 < c + r + t_c:
                x -= dx
                y -= dy
            else:
                x += dx
                y += dy
        if x == 0 and y == 0:
            return 1, step, step, 0, 0
    return 0, 0, horizon, x, y


@njit(cache=True, nogil=True)
def tree_episode_kernel(
    c, r, t_c, cop_kind, robber_kind, Delta, delta, gap0, a0, b0, l0, horizon, gen
):
    """One tree episode on the summary chain; returns an int64 record."""
    rec = np.zeros(TREE_REC_LEN, dtype=np.int64)
    gap = gap0
    a = a0
    b = b0
    shared = l0
    for step in range(1, horizon + 1):
        u1 = gen.random()
        u2 = gen.random()
        before_gap = gap
        mover_is_robber = False
        has_move = False
        sign = 0
        lower = 0
        if u1 < c:
            # sober cop
            if cop_kind == TREE_COP_CS:
                if gap > 0:
                    if a >= 1:
                        a -= 1
                    else:
                        gap -= 1
                        has_move = True
                        sign = -1
                        lower = -1
                    shared = 0
                elif a > shared:
                    a -= 1
                else:
                    a += 1
                    shared += 1
            else:  # CSB
                if a >= 1:
                    a -= 1
                    if gap == 0:
                        if shared > a:
                            shared = a
                    else:
                        shared = 0
                elif gap > 0:
                    gap -= 1
                    shared = 0
                    has_move = True
                    sign = -1
                    lower = -1
                else:  # stay under the robber's copy; ties record +1
                    has_move = True
                    sign = 1
                    lower = -1
        elif u1 < c + r:
            # sober robber
            mover_is_robber = True
            if b == 0:
                gap += 1
                has_move = True
                sign = 1
                lower = 1
            elif robber_kind == TREE_ROBBER_RSA:
                if gap == 0 and shared == b and a > b:
                    pick = int(u2 * (delta - 1))
                    if pick > delta - 2:
                        pick = delta - 2
                    if pick == 0:
                        b -= 1
                        shared = b
                    else:
                        b += 1
                else:
                    b += 1
                    if gap != 0:
                        shared = 0
            else:  # RSB: backtrack toward the base
                b -= 1
                if gap == 0:
                    if shared > b:
                        shared = b
                else:
                    shared = 0
        else:
            tipsy_cop = u1 < c + r + t_c
            if tipsy_cop:
                own = a
                other = b
            else:
                mover_is_robber = True
                own = b
                other = a
            if own == 0:
                slot = int(u2 * Delta)
                if slot > Delta - 1:
                    slot = Delta - 1
                if slot == Delta - 1:
                    own = 1
                    if gap == 0 and other >= 1:
                        shared = 1
                    else:
                        shared = 0
                elif slot == 0:
                    has_move = True
                    lower = -1
                    if gap == 0:
                        gap = 1
                        sign = 1
                    else:
                        gap -= 1
                        sign = -1
                    shared = 0
                else:
                    gap += 1
                    has_move = True
                    sign = 1
                    lower = 1
                    shared = 0
            else:
                slot = int(u2 * delta)
                if slot > delta - 1:
                    slot = delta - 1
                if slot == 0:
                    own -= 1
                    if gap == 0:
                        if shared > own:
                            shared = own
                    else:
                        shared = 0
                else:
                    can_match = gap == 0 and shared == own and other > own
                    if can_match and slot == 1:
                        shared += 1
                    own += 1
            if tipsy_cop:
                a = own
            else:
                b = own

        if has_move:
            rec[REC_DRIFT] += sign
            if sign < lower:
                rec[REC_DOMINATION] += 1
            if before_gap > 0 and sign != lower:
                rec[REC_SEPARATED] += 1
            if mover_is_robber:
                rec[REC_ROBBER_MOVES] += 1
                rec[REC_SUM_SIGN_R] += sign
                rec[REC_SUM_LOWER_R] += lower
                gap_len = step - rec[REC_LAST_ROBBER_MOVE]
                rec[REC_SUM_GAP] += gap_len
                rec[REC_SUM_GAP_SQ] += gap_len * gap_len
                rec[REC_LAST_ROBBER_MOVE] = step
            else:
                rec[REC_COP_MOVES] += 1
                rec[REC_SUM_SIGN_C] += sign
                rec[REC_SUM_LOWER_C] += lower

        if a > rec[REC_MAX_A]:
            rec[REC_MAX_A] = a
        if b > rec[REC_MAX_B]:
            rec[REC_MAX_B] = b
        rec[REC_SUM_A] += a
        rec[REC_SUM_B] += b

        if gap == 0 and a == b and b == shared:
            rec[REC_CAPTURED] = 1
            rec[REC_CAPTURE_TIME] = step
            rec[REC_STEPS] = step
            rec[REC_GAP] = gap
            rec[REC_A] = a
            rec[REC_B] = b
            rec[REC_SHARED] = shared
            return rec

    rec[REC_STEPS] = horizon
    rec[REC_GAP] = gap
    rec[REC_A] = a
    rec[REC_B] = b
    rec[REC_SHARED] = shared
    return rec
