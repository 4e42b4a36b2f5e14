# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled interception kernel; see _pykernel.py for the reference semantics.

Every floating-point operation matches the pure-Python kernel step for step
so the two backends are bit-identical.
"""
from libc.math cimport ceil, sqrt

BACKEND = "c"


def intercept_first(double sx, double sy, double dx, double dy, double speed,
                    double decay, double stop_dist, double half_len, double half_wid,
                    int horizon, double[:] px, double[:] py, double[:] pmax,
                    int n, int exclude, double margin, int delay):
    cdef double bx = sx
    cdef double by = sy
    cdef bint at_rest = speed <= 0.0
    cdef double dk = 1.0
    cdef double one_minus = 1.0 - decay
    cdef int k = 0
    cdef int i, c
    cdef double disp, ddx, ddy, reach
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
                    c = <int>ceil(reach / pmax[i]) + delay
                if c <= k:
                    return (1, i, k, bx, by)
            i += 1
    return (0, -1, horizon, bx, by)
