"""Independent brute-force oracles used to freeze expected values.

Nothing in here shares code paths with the package's primary algorithms:
distances come from dense waypoint enumeration, gradients from central finite
differences, and tangents from direct angular maximization.
"""

from __future__ import annotations

import math

import numpy as np

from domgame.geom import Point2, contains_point, visible


def sampled_path_minimum(world, a: Point2, b: Point2, n_grid: int = 720, r_max: float = 60.0) -> float:
    """Minimal one-bend broken-line length a->q->b over a dense polar grid of q.

    Valid for worlds with a single reflex feature near the origin (the corner
    wedge); direct connection is included when unobstructed.
    """
    best = math.inf
    if visible(world, a, b):
        best = (a - b).norm()
    for theta in np.linspace(0.0, 2.0 * math.pi, n_grid, endpoint=False):
        for rho in np.geomspace(1e-9, r_max, 160):
            q = Point2(rho * math.cos(theta), rho * math.sin(theta))
            if not contains_point(world, q):
                continue
            if visible(world, a, q) and visible(world, q, b):
                best = min(best, (a - q).norm() + (q - b).norm())
    return best


def finite_difference_gradients(dist_fn, a: Point2, b: Point2, step: float = 1e-6):
    """Central finite differences of dist_fn(a, b) in both arguments."""

    def g(point, other, first):
        out = []
        for dx, dy in ((step, 0.0), (0.0, step)):
            p_hi = Point2(point.x + dx, point.y + dy)
            p_lo = Point2(point.x - dx, point.y - dy)
            if first:
                hi, lo = dist_fn(p_hi, other), dist_fn(p_lo, other)
            else:
                hi, lo = dist_fn(other, p_hi), dist_fn(other, p_lo)
            out.append((hi - lo) / (2.0 * step))
        return Point2(out[0], out[1])

    return g(a, b, True), g(b, a, False)


def tangent_half_angle(x_e: Point2, rho_p: float, alpha: float) -> float:
    """Half-angle at the origin subtended by {x: |x| - a|x - x_e| = -rho_p}.

    Brute force: the curve is star-shaped about x_e, so walk rays from x_e,
    solve the defining equation by bisection, and maximize the angular offset
    of the hit point from the x_e direction; golden-section polish at the end.
    """

    def hit(u: Point2) -> Point2:
        f = lambda s: math.hypot(x_e.x + s * u.x, x_e.y + s * u.y) + rho_p - alpha * s
        lo, hi = 0.0, 1.0
        while f(hi) > 0.0:
            hi *= 2.0
            if hi > 1e9:
                raise RuntimeError("no crossing")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        s = 0.5 * (lo + hi)
        return Point2(x_e.x + s * u.x, x_e.y + s * u.y)

    base = math.atan2(x_e.y, x_e.x)

    def offset(beta: float) -> float:
        p = hit(Point2(math.cos(beta), math.sin(beta)))
        d = (math.atan2(p.y, p.x) - base + math.pi) % (2.0 * math.pi) - math.pi
        return abs(d)

    betas = np.linspace(0.0, 2.0 * math.pi, 2000, endpoint=False)
    vals = [offset(float(t)) for t in betas]
    k = int(np.argmax(vals))
    lo = betas[k] - 2.0 * math.pi / 2000
    hi = betas[k] + 2.0 * math.pi / 2000
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - phi * (hi - lo)
    d = lo + phi * (hi - lo)
    fc, fd = offset(c), offset(d)
    for _ in range(120):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = offset(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = offset(d)
    return max(fc, fd)
