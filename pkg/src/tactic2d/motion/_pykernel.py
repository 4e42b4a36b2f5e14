"""Pure-Python interception kernel, the fallback when the compiled one is absent.

Must stay operation-for-operation identical to ``_ckernel.pyx`` so both
backends produce bit-identical results. Distances use sqrt(dx*dx + dy*dy)
rather than hypot on purpose: CPython's math.hypot and libm's hypot can
disagree in the last ulp.
"""
from math import ceil, sqrt

BACKEND = "python"


def intercept_first(sx, sy, dx, dy, speed, decay, stop_dist, half_len, half_wid,
                    horizon, px, py, pmax, n, exclude, margin, delay):
    """First player able to meet the ball, scanning cycle by cycle.

    The ball starts at (sx, sy) moving along unit direction (dx, dy) with the
    given initial speed, decaying geometrically each cycle. Once cumulative
    displacement reaches stop_dist the ball is treated as at rest (a pass
    arriving at its target); leaving the field ends the simulation. Player i
    reaches a point when ceil(max(0, dist - margin) / pmax[i]) + delay cycles
    have elapsed. Players are scanned in packed order (teammates by unum,
    then opponents by unum) so index order implements the tie-break.

    Returns (status, winner_index, cycle, ball_x, ball_y) with status 1 when
    intercepted, else 0.
    """
    bx = sx
    by = sy
    at_rest = speed <= 0.0
    dk = 1.0
    one_minus = 1.0 - decay
    k = 0
    while k < horizon:
        k += 1
        if not at_rest:
            dk *= decay
            disp = speed * (1.0 - dk) / one_minus
            bx = sx + dx * disp
            by = sy + dy * disp
            if bx < -half_len or bx > half_len or by < -half_wid or by > half_wid:
                return (0, -1, k, bx, by)
            if disp >= stop_dist:
                at_rest = True
        i = 0
        while i < n:
            if i != exclude:
                ddx = px[i] - bx
                ddy = py[i] - by
                reach = sqrt(ddx * ddx + ddy * ddy) - margin
                if reach <= 0.0:
                    c = delay
                else:
                    c = int(ceil(reach / pmax[i])) + delay
                if c <= k:
                    return (1, i, k, bx, by)
            i += 1
    return (0, -1, horizon, bx, by)
