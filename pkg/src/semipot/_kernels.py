"""Compiled inner loops: polygon queries, walk-on-spheres, red-black SOR."""

from __future__ import annotations

import math

import numba
import numpy as np

# plate / target shape codes
SHAPE_DISK = 0
SHAPE_ANNULUS = 1
SHAPE_POLYGON = 2
SHAPE_SEGMENT = 3

# domain codes (open regions walkers live in)
DOMAIN_DISK = 0
DOMAIN_STRIP = 1
DOMAIN_HALFPLANE = 2
DOMAIN_RECT = 3


@numba.njit(cache=True, nogil=True)
def _in_polygon(px, py, vx, vy):
    inside = False
    n = vx.shape[0]
    j = n - 1
    for i in range(n):
        yi = vy[i]
        yj = vy[j]
        if (yi > py) != (yj > py):
            xc = vx[i] + (py - yi) * (vx[j] - vx[i]) / (yj - yi)
            if px < xc:
                inside = not inside
        j = i
    return inside


@numba.njit(cache=True, nogil=True)
def points_in_polygon(px, py, vx, vy):
    out = np.zeros(px.shape[0], dtype=np.bool_)
    xmin, xmax = vx.min(), vx.max()
    ymin, ymax = vy.min(), vy.max()
    for k in range(px.shape[0]):
        x = px[k]
        y = py[k]
        if x < xmin or x > xmax or y < ymin or y > ymax:
            continue
        out[k] = _in_polygon(x, y, vx, vy)
    return out


@numba.njit(cache=True, nogil=True)
def _segment_distance(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(px - ax, py - ay)
    s = ((px - ax) * dx + (py - ay) * dy) / ll
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return math.hypot(px - ax - s * dx, py - ay - s * dy)


@numba.njit(cache=True, nogil=True)
def _polyline_distance(px, py, vx, vy, closed):
    n = vx.shape[0]
    best = np.inf
    last = n if closed else n - 1
    for i in range(last):
        j = i + 1 if i + 1 < n else 0
        d = _segment_distance(px, py, vx[i], vy[i], vx[j], vy[j])
        if d < best:
            best = d
    return best


@numba.njit(cache=True, nogil=True)
def polygon_boundary_distance(px, py, vx, vy):
    out = np.empty(px.shape[0])
    for k in range(px.shape[0]):
        out[k] = _polyline_distance(px[k], py[k], vx, vy, True)
    return out


@numba.njit(cache=True, nogil=True)
def _target_distance(x, y, kind, par, vx, vy):
    """Distance from (x, y) to a compact target; 0 inside it."""
    if kind == SHAPE_DISK:
        d = math.hypot(x - par[0], y - par[1]) - par[2]
        return d if d > 0.0 else 0.0
    if kind == SHAPE_ANNULUS:
        r = math.hypot(x - par[0], y - par[1])
        if r < par[2]:
            return par[2] - r
        if r > par[3]:
            return r - par[3]
        return 0.0
    if kind == SHAPE_POLYGON:
        if _in_polygon(x, y, vx, vy):
            return 0.0
        return _polyline_distance(x, y, vx, vy, True)
    return _segment_distance(x, y, par[0], par[1], par[2], par[3])


@numba.njit(cache=True, nogil=True)
def _domain_distance(x, y, kind, par):
    """Signed distance to the boundary of an open domain (negative outside)."""
    if kind == DOMAIN_DISK:
        return par[2] - math.hypot(x - par[0], y - par[1])
    if kind == DOMAIN_STRIP:
        a = y - par[0]
        b = par[1] - y
        return a if a < b else b
    if kind == DOMAIN_HALFPLANE:
        return par[0] * x + par[1] * y - par[2]
    d = x - par[0]
    d = min(d, par[1] - x)
    d = min(d, y - par[2])
    return min(d, par[3] - y)


@numba.njit(cache=True, nogil=True)
def _box_distance(x, y, box):
    dx = max(box[0] - x, 0.0, x - box[1])
    dy = max(box[2] - y, 0.0, y - box[3])
    return math.hypot(dx, dy)


@numba.njit(cache=True, nogil=True)
def _target_box(tkind, vx, vy):
    box = np.full(4, -np.inf)
    box[0] = np.inf
    box[2] = np.inf
    if tkind == SHAPE_POLYGON:
        box[0], box[1] = vx.min(), vx.max()
        box[2], box[3] = vy.min(), vy.max()
    return box


@numba.njit(cache=True, nogil=True)
def _walk(rng, x, y, tkind, tpar, tvx, tvy, box, dkind, dpar, eps, max_steps):
    """One walker; status 1 = absorbed at the target, 0 = at the outer boundary, -1 = step cap."""
    poly = tkind == SHAPE_POLYGON
    for s in range(max_steps):
        dd = _domain_distance(x, y, dkind, dpar)
        # the bounding box bounds the polygon distance from below; skip the exact
        # evaluation when it cannot be the smaller radius
        if poly and _box_distance(x, y, box) >= max(dd, 2.0 * eps):
            dt = np.inf
        else:
            dt = _target_distance(x, y, tkind, tpar, tvx, tvy)
        if dt <= eps:
            return 1, x, y, s
        if dd <= eps:
            return 0, x, y, s
        r = dt if dt < dd else dd
        a = 2.0 * math.pi * rng.random()
        x += r * math.cos(a)
        y += r * math.sin(a)
    return -1, x, y, max_steps


@numba.njit(cache=True, nogil=True)
def wos_batch(rng, x0, y0, n, tkind, tpar, tvx, tvy, dkind, dpar, eps, max_steps):
    """Run ``n`` walk-on-spheres walkers from (x0, y0).

    Returns (absorbed at target, absorbed at outer boundary, discarded, total steps).
    """
    hits = 0
    exits = 0
    discards = 0
    steps = 0
    box = _target_box(tkind, tvx, tvy)
    for _ in range(n):
        status, _x, _y, k = _walk(rng, x0, y0, tkind, tpar, tvx, tvy, box, dkind, dpar, eps, max_steps)
        steps += k
        if status == 1:
            hits += 1
        elif status == 0:
            exits += 1
        else:
            discards += 1
    return hits, exits, discards, steps


@numba.njit(cache=True, nogil=True)
def wos_exit_points(rng, x0, y0, n, tkind, tpar, tvx, tvy, dkind, dpar, eps, max_steps):
    """Absorption status and position of every walker."""
    status = np.empty(n, dtype=np.int8)
    px = np.empty(n)
    py = np.empty(n)
    box = _target_box(tkind, tvx, tvy)
    for k in range(n):
        st, x, y, _s = _walk(rng, x0, y0, tkind, tpar, tvx, tvy, box, dkind, dpar, eps, max_steps)
        status[k] = st
        px[k] = x
        py[k] = y
    return status, px, py


# node kinds for the relaxation
NODE_FIXED = 0
NODE_REGULAR = 1
NODE_GENERAL = 2


@numba.njit(cache=True, nogil=True)
def sor_red_black(u, kind, ce, cw, cn, cs, rhs, diag, omega, tol, max_sweeps):
    """Weighted five-point red-black SOR; the outermost ring must be fixed.

    Regular nodes have four free unit-weight neighbours and no source; general
    nodes read their coefficients.  Returns (sweeps, max update of last sweep).
    """
    ny, nx = u.shape
    maxd = np.inf
    for sweep in range(max_sweeps):
        maxd = 0.0
        for color in range(2):
            for j in range(1, ny - 1):
                start = 1 + (j + color + 1) % 2
                for i in range(start, nx - 1, 2):
                    k = kind[j, i]
                    if k == NODE_FIXED:
                        continue
                    if k == NODE_REGULAR:
                        s = 0.25 * (u[j, i + 1] + u[j, i - 1] + u[j + 1, i] + u[j - 1, i])
                    else:
                        s = (rhs[j, i] + ce[j, i] * u[j, i + 1] + cw[j, i] * u[j, i - 1]
                             + cn[j, i] * u[j + 1, i] + cs[j, i] * u[j - 1, i]) / diag[j, i]
                    d = omega * (s - u[j, i])
                    u[j, i] += d
                    if d < 0.0:
                        d = -d
                    if d > maxd:
                        maxd = d
        if maxd < tol:
            return sweep + 1, maxd
    return max_sweeps, maxd
