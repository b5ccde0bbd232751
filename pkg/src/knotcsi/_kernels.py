"""Compiled inner loops for polygon Gauss sums and projected segment crossings."""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _cross(a0, a1, a2, b0, b1, b2):
    return a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0


@njit(cache=True, inline="always")
def _unit_cross(a0, a1, a2, b0, b1, b2):
    c0, c1, c2 = _cross(a0, a1, a2, b0, b1, b2)
    nrm = math.sqrt(c0 * c0 + c1 * c1 + c2 * c2)
    if nrm < 1e-300:
        return 0.0, 0.0, 0.0, False
    return c0 / nrm, c1 / nrm, c2 / nrm, True


@njit(cache=True, inline="always")
def _asin_dot(a0, a1, a2, b0, b1, b2):
    return math.asin(min(1.0, max(-1.0, a0 * b0 + a1 * b1 + a2 * b2)))


@njit(cache=True, inline="always")
def _segment_pair(P, i0, i1, Q, j0, j1):
    # Signed solid angle subtended by segment P[i0]P[i1] against Q[j0]Q[j1],
    # over 4*pi; exact for straight segments.
    a0, a1, a2 = Q[j0, 0] - P[i0, 0], Q[j0, 1] - P[i0, 1], Q[j0, 2] - P[i0, 2]
    b0, b1, b2 = Q[j1, 0] - P[i0, 0], Q[j1, 1] - P[i0, 1], Q[j1, 2] - P[i0, 2]
    c0, c1, c2 = Q[j0, 0] - P[i1, 0], Q[j0, 1] - P[i1, 1], Q[j0, 2] - P[i1, 2]
    d0, d1, d2 = Q[j1, 0] - P[i1, 0], Q[j1, 1] - P[i1, 1], Q[j1, 2] - P[i1, 2]
    n1x, n1y, n1z, ok1 = _unit_cross(a0, a1, a2, b0, b1, b2)
    n2x, n2y, n2z, ok2 = _unit_cross(b0, b1, b2, d0, d1, d2)
    n3x, n3y, n3z, ok3 = _unit_cross(d0, d1, d2, c0, c1, c2)
    n4x, n4y, n4z, ok4 = _unit_cross(c0, c1, c2, a0, a1, a2)
    if not (ok1 and ok2 and ok3 and ok4):
        return 0.0
    omega = (_asin_dot(n1x, n1y, n1z, n2x, n2y, n2z)
             + _asin_dot(n2x, n2y, n2z, n3x, n3y, n3z)
             + _asin_dot(n3x, n3y, n3z, n4x, n4y, n4z)
             + _asin_dot(n4x, n4y, n4z, n1x, n1y, n1z))
    s0, s1, s2 = _cross(Q[j1, 0] - Q[j0, 0], Q[j1, 1] - Q[j0, 1], Q[j1, 2] - Q[j0, 2],
                        P[i1, 0] - P[i0, 0], P[i1, 1] - P[i0, 1], P[i1, 2] - P[i0, 2])
    sgn = s0 * a0 + s1 * a1 + s2 * a2
    if sgn > 0:
        return omega / (4.0 * math.pi)
    if sgn < 0:
        return -omega / (4.0 * math.pi)
    return 0.0


@njit(cache=True)
def polygon_writhe(P):
    """Gauss self-integral of the closed polygon with vertices ``P``."""
    n = P.shape[0]
    total = 0.0
    for i in range(n):
        i1 = (i + 1) % n
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            total += _segment_pair(P, i, i1, P, j, (j + 1) % n)
    return 2.0 * total


@njit(cache=True)
def polygon_linking(P, Q):
    total = 0.0
    n = P.shape[0]
    m = Q.shape[0]
    for i in range(n):
        i1 = (i + 1) % n
        for j in range(m):
            total += _segment_pair(P, i, i1, Q, j, (j + 1) % m)
    return total


@njit(cache=True)
def segment_crossings(xy, comp, first, count, cap):
    """Proper intersections between non-adjacent closed-polygon segments.

    ``xy`` stacks the projected vertices of every component; ``first[c]`` and
    ``count[c]`` locate component ``c``. Returns rows
    ``(global_i, global_j, frac_i, frac_j)`` with ``global_i < global_j``.
    """
    total = xy.shape[0]
    out_idx = np.empty((cap, 2), dtype=np.int64)
    out_frac = np.empty((cap, 2))
    found = 0
    # per-segment bounding boxes for a cheap reject
    lo = np.empty((total, 2))
    hi = np.empty((total, 2))
    nxt = np.empty(total, dtype=np.int64)
    for g in range(total):
        c = comp[g]
        k = g - first[c]
        h = first[c] + (k + 1) % count[c]
        nxt[g] = h
        for a in range(2):
            lo[g, a] = min(xy[g, a], xy[h, a])
            hi[g, a] = max(xy[g, a], xy[h, a])
    for g in range(total):
        for h in range(g + 1, total):
            if comp[g] == comp[h]:
                if h == nxt[g] or g == nxt[h]:
                    continue
            if lo[h, 0] > hi[g, 0] or hi[h, 0] < lo[g, 0]:
                continue
            if lo[h, 1] > hi[g, 1] or hi[h, 1] < lo[g, 1]:
                continue
            px = xy[g, 0]
            py = xy[g, 1]
            rx = xy[nxt[g], 0] - px
            ry = xy[nxt[g], 1] - py
            qx = xy[h, 0]
            qy = xy[h, 1]
            sx = xy[nxt[h], 0] - qx
            sy = xy[nxt[h], 1] - qy
            den = rx * sy - ry * sx
            if den == 0.0:
                continue
            wx = qx - px
            wy = qy - py
            a = (wx * sy - wy * sx) / den
            b = (wx * ry - wy * rx) / den
            if 0.0 <= a < 1.0 and 0.0 <= b < 1.0:
                if found < cap:
                    out_idx[found, 0] = g
                    out_idx[found, 1] = h
                    out_frac[found, 0] = a
                    out_frac[found, 1] = b
                found += 1
    return out_idx[: min(found, cap)], out_frac[: min(found, cap)], found
