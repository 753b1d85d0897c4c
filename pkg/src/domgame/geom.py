"""Playable regions and the shortest-path metric.

Three world kinds are supported: the free plane, a wedge obstacle anchored at
the origin (the playable region is everything outside an open angular sector
around the positive x-axis), and finite collections of simple polygonal
obstacles. Distances are geodesic lengths inside the closed region; shortest
paths are broken lines bending only at obstacle vertices.

Scalar operations are exact-tolerance and robust near boundaries; the
``*_batch`` helpers vectorize over numpy point arrays for grid oracles and
assume points in generic position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi

# Points this close to an obstacle edge count as boundary (the region is closed).
EDGE_TOL = 1e-12
# Two distinct shortest paths tying within this relative length are a gradient tie.
TIE_REL_TOL = 1e-9
# Angular spread between candidate gradient directions above which a tie is real.
TIE_ANGLE_TOL = 1e-8


class OutsideWorldError(ValueError):
    """A queried point lies in an obstacle's interior."""


class NonDifferentiableError(ValueError):
    """The metric has no unique gradient at the queried argument pair."""


@dataclass(frozen=True, slots=True)
class Point2:
    """A point (or free vector) in the plane. Coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Point2":
        return Point2(k * self.x, k * self.y)

    def dot(self, other: "Point2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Point2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Point2":
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return Point2(self.x / n, self.y / n)

    def angle(self) -> float:
        """Polar angle in (-pi, pi]."""
        return math.atan2(self.y, self.x)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


ORIGIN = Point2(0.0, 0.0)


def from_polar(rho: float, theta: float) -> Point2:
    return Point2(rho * math.cos(theta), rho * math.sin(theta))


@dataclass(frozen=True, slots=True)
class PolarPoint:
    """Polar coordinates (rho >= 0, theta in the world's admissible range)."""

    rho: float
    theta: float

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError("rho must be non-negative")

    def to_point(self) -> Point2:
        return from_polar(self.rho, self.theta)


@dataclass(frozen=True)
class FreePlane:
    """The whole plane, no obstacles."""


@dataclass(frozen=True)
class CornerWedge:
    """Region outside the open wedge (-theta0, theta0) around the +x axis.

    The playable set is {(rho cos t, rho sin t): rho >= 0, t in [theta0,
    2pi - theta0]}; the wedge vertex is the origin and belongs to the region.
    """

    theta0: float

    def __post_init__(self):
        if not (0.0 < self.theta0 < math.pi / 2.0):
            raise ValueError("theta0 must lie in (0, pi/2)")


@dataclass(frozen=True)
class PolygonWorld:
    """Plane minus the open interiors of disjoint simple polygons."""

    obstacles: tuple

    def __post_init__(self):
        polys = []
        for poly in self.obstacles:
            pts = tuple(p if isinstance(p, Point2) else Point2(*p) for p in poly)
            if len(pts) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            area = _signed_area(pts)
            if abs(area) < 1e-12:
                raise ValueError("degenerate polygon (zero area)")
            if area < 0.0:
                pts = tuple(reversed(pts))  # store counterclockwise
            if not _is_simple(pts):
                raise ValueError("polygon is self-intersecting")
            polys.append(pts)
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if _polys_overlap(polys[i], polys[j]):
                    raise ValueError("obstacles must be pairwise disjoint")
        object.__setattr__(self, "obstacles", tuple(polys))

    def vertices(self) -> tuple:
        return tuple(v for poly in self.obstacles for v in poly)


World = Union[FreePlane, CornerWedge, PolygonWorld]


@dataclass(frozen=True)
class ShortestPath:
    """A minimizing broken line; interior waypoints sit on obstacle vertices."""

    waypoints: tuple
    length: float


# ---------------------------------------------------------------------------
# polygon primitives


def _signed_area(pts: Sequence[Point2]) -> float:
    s = 0.0
    for i in range(len(pts)):
        a, b = pts[i], pts[(i + 1) % len(pts)]
        s += a.x * b.y - b.x * a.y
    return 0.5 * s


def _seg_seg_params(p: Point2, q: Point2, a: Point2, b: Point2):
    """Intersection parameters (t on pq, u on ab) or None if parallel."""
    r = q - p
    s = b - a
    denom = r.cross(s)
    if abs(denom) < 1e-15 * max(1.0, r.norm() * s.norm()):
        return None
    w = a - p
    t = w.cross(s) / denom
    u = w.cross(r) / denom
    return t, u


def _is_simple(pts: Sequence[Point2]) -> bool:
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = pts[j], pts[(j + 1) % n]
            hit = _seg_seg_params(a, b, c, d)
            if hit is not None:
                t, u = hit
                if -1e-12 < t < 1.0 + 1e-12 and -1e-12 < u < 1.0 + 1e-12:
                    return False
    return True


def _point_seg_dist(p: Point2, a: Point2, b: Point2) -> float:
    ab = b - a
    denom = ab.dot(ab)
    if denom == 0.0:
        return (p - a).norm()
    t = max(0.0, min(1.0, (p - a).dot(ab) / denom))
    return (p - (a + ab.scaled(t))).norm()


def _poly_boundary_dist(pts: Sequence[Point2], p: Point2) -> float:
    n = len(pts)
    return min(_point_seg_dist(p, pts[i], pts[(i + 1) % n]) for i in range(n))


def _winding_inside(pts: Sequence[Point2], p: Point2) -> bool:
    """Crossing-number parity test; boundary behaviour is unspecified."""
    inside = False
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if (a.y > p.y) != (b.y > p.y):
            xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if p.x < xi:
                inside = not inside
    return inside


def _strictly_inside(pts: Sequence[Point2], p: Point2, tol: float = EDGE_TOL) -> bool:
    if _poly_boundary_dist(pts, p) <= tol:
        return False
    return _winding_inside(pts, p)


def _polys_overlap(a: Sequence[Point2], b: Sequence[Point2]) -> bool:
    na, nb = len(a), len(b)
    for i in range(na):
        for j in range(nb):
            hit = _seg_seg_params(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])
            if hit is not None:
                t, u = hit
                if -1e-12 < t < 1 + 1e-12 and -1e-12 < u < 1 + 1e-12:
                    return True
    return _winding_inside(a, b[0]) or _winding_inside(b, a[0])


def _segment_blocked(poly: Sequence[Point2], p: Point2, q: Point2) -> bool:
    """True iff the open segment (p, q) meets the polygon's open interior.

    Splits [p, q] at every edge intersection and tests each piece's midpoint;
    grazing contacts along edges or through vertices do not block.
    """
    params = [0.0, 1.0]
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        hit = _seg_seg_params(p, q, a, b)
        if hit is None:
            # parallel: endpoints of the edge projected onto pq bound overlaps
            for v in (a, b):
                if _point_seg_dist(v, p, q) <= EDGE_TOL:
                    seg = q - p
                    denom = seg.dot(seg)
                    if denom > 0.0:
                        params.append((v - p).dot(seg) / denom)
            continue
        t, u = hit
        if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
            params.append(min(1.0, max(0.0, t)))
    params = sorted(set(params))
    for lo, hi in zip(params[:-1], params[1:]):
        if hi - lo < 1e-14:
            continue
        mid = 0.5 * (lo + hi)
        m = Point2(p.x + mid * (q.x - p.x), p.y + mid * (q.y - p.y))
        if _strictly_inside(poly, m):
            return True
    return False


# ---------------------------------------------------------------------------
# corner-wedge primitives


def wedge_theta(world: CornerWedge, p: Point2) -> float:
    """Angle of p normalized to [0, 2pi); undefined at the origin."""
    if p.norm() == 0.0:
        raise ValueError("angle undefined at the wedge vertex")
    return math.atan2(p.y, p.x) % TWO_PI


def _dist_to_ray(p: Point2, direction: Point2) -> float:
    t = p.dot(direction)
    if t <= 0.0:
        return p.norm()
    return (p - direction.scaled(t)).norm()


def _wedge_contains(world: CornerWedge, p: Point2) -> bool:
    rho = p.norm()
    if rho == 0.0:
        return True
    t = math.atan2(p.y, p.x) % TWO_PI
    if world.theta0 <= t <= TWO_PI - world.theta0:
        return True
    # inside the angular gap: accept only within edge tolerance
    e_up = from_polar(1.0, world.theta0)
    e_dn = from_polar(1.0, -world.theta0)
    return min(_dist_to_ray(p, e_up), _dist_to_ray(p, e_dn)) <= EDGE_TOL


# ---------------------------------------------------------------------------
# public scalar operations


def contains_point(world: World, p: Point2) -> bool:
    """True iff p belongs to the (closed) playable region."""
    if isinstance(world, FreePlane):
        return True
    if isinstance(world, CornerWedge):
        return _wedge_contains(world, p)
    return not any(_strictly_inside(poly, p) for poly in world.obstacles)


def _require_inside(world: World, p: Point2) -> None:
    if not contains_point(world, p):
        raise OutsideWorldError(f"point ({p.x}, {p.y}) lies inside an obstacle")


def visible(world: World, a: Point2, b: Point2) -> bool:
    """True iff the closed segment [a, b] stays in the playable region."""
    _require_inside(world, a)
    _require_inside(world, b)
    if isinstance(world, FreePlane):
        return True
    if isinstance(world, CornerWedge):
        if a.norm() == 0.0 or b.norm() == 0.0:
            return True
        ta = wedge_theta(world, a)
        tb = wedge_theta(world, b)
        return abs(ta - tb) <= math.pi
    return not any(_segment_blocked(poly, a, b) for poly in world.obstacles)


def distance(world: World, a: Point2, b: Point2) -> float:
    """Shortest-path distance d(a, b) inside the region."""
    if isinstance(world, FreePlane):
        return (a - b).norm()
    if isinstance(world, CornerWedge):
        _require_inside(world, a)
        _require_inside(world, b)
        if a.norm() == 0.0 or b.norm() == 0.0:
            return (a - b).norm()
        if abs(wedge_theta(world, a) - wedge_theta(world, b)) <= math.pi:
            return (a - b).norm()
        return a.norm() + b.norm()
    return shortest_path(world, a, b).length


def shortest_path(world: World, a: Point2, b: Point2) -> ShortestPath:
    """A minimizing broken line from a to b with its length."""
    _require_inside(world, a)
    _require_inside(world, b)
    if isinstance(world, FreePlane):
        return ShortestPath((a, b), (a - b).norm())
    if isinstance(world, CornerWedge):
        if visible(world, a, b):
            return ShortestPath((a, b), (a - b).norm())
        return ShortestPath((a, ORIGIN, b), a.norm() + b.norm())
    return _polygon_shortest_path(world, a, b)


# ---------------------------------------------------------------------------
# polygon visibility graph


@lru_cache(maxsize=32)
def _vertex_graph(world: PolygonWorld):
    """All-pairs geodesic distances and next-hops over obstacle vertices."""
    verts = world.vertices()
    n = len(verts)
    dist = np.full((n, n), np.inf)
    nxt = [[-1] * n for _ in range(n)]
    for i in range(n):
        dist[i, i] = 0.0
        nxt[i][i] = i
    for i in range(n):
        for j in range(i + 1, n):
            if not any(_segment_blocked(poly, verts[i], verts[j]) for poly in world.obstacles):
                d = (verts[i] - verts[j]).norm()
                dist[i, j] = dist[j, i] = d
                nxt[i][j] = j
                nxt[j][i] = i
    for k in range(n):  # Floyd-Warshall; vertex counts stay small
        for i in range(n):
            dik = dist[i, k]
            if not np.isfinite(dik):
                continue
            for j in range(n):
                nd = dik + dist[k, j]
                if nd < dist[i, j] - 1e-15:
                    dist[i, j] = nd
                    nxt[i][j] = nxt[i][k]
    return verts, dist, nxt


def _visible_vertices(world: PolygonWorld, p: Point2):
    verts = world.vertices()
    out = []
    for i, v in enumerate(verts):
        if not any(_segment_blocked(poly, p, v) for poly in world.obstacles):
            out.append(i)
    return out


def _polygon_shortest_path(world: PolygonWorld, a: Point2, b: Point2) -> ShortestPath:
    if (b.x, b.y) < (a.x, a.y):  # canonical order keeps d(a,b) == d(b,a) exact
        rev = _polygon_shortest_path(world, b, a)
        return ShortestPath(tuple(reversed(rev.waypoints)), rev.length)
    if not any(_segment_blocked(poly, a, b) for poly in world.obstacles):
        return ShortestPath((a, b), (a - b).norm())
    verts, dist, nxt = _vertex_graph(world)
    vis_a = _visible_vertices(world, a)
    vis_b = _visible_vertices(world, b)
    best = math.inf
    pick = None
    for i in vis_a:
        da = (a - verts[i]).norm()
        for j in vis_b:
            if not np.isfinite(dist[i, j]):
                continue
            total = da + dist[i, j] + (verts[j] - b).norm()
            if total < best:
                best = total
                pick = (i, j)
    if pick is None:
        raise ValueError("no path between the points (disconnected region?)")
    i, j = pick
    chain = [i]
    while chain[-1] != j:
        chain.append(nxt[chain[-1]][j])
    waypoints = (a, *[verts[k] for k in chain], b)
    # drop duplicated endpoints when a or b coincides with a vertex
    cleaned = [waypoints[0]]
    for w in waypoints[1:]:
        if (w - cleaned[-1]).norm() > EDGE_TOL:
            cleaned.append(w)
    return ShortestPath(tuple(cleaned), best)


# ---------------------------------------------------------------------------
# metric gradients


def _first_hop_candidates(world: PolygonWorld, a: Point2, b: Point2):
    """(length, first waypoint after a) for every near-optimal route."""
    cands = []
    if not any(_segment_blocked(poly, a, b) for poly in world.obstacles):
        cands.append(((a - b).norm(), b))
    verts, dist, _ = _vertex_graph(world)
    vis_b = _visible_vertices(world, b)
    db = {j: (verts[j] - b).norm() for j in vis_b}
    for i in _visible_vertices(world, a):
        tail = min((dist[i, j] + db[j] for j in vis_b if np.isfinite(dist[i, j])), default=math.inf)
        if math.isfinite(tail):
            cands.append(((a - verts[i]).norm() + tail, verts[i]))
    return cands


def metric_gradients(world: World, a: Point2, b: Point2):
    """Unit gradients of d(a, b) with respect to a and to b.

    Each gradient points from the adjacent path waypoint back toward its own
    endpoint. Raises NonDifferentiableError at coincident points, at obstacle
    vertices, and wherever two distinct shortest paths tie within tolerance.
    """
    sep = (a - b).norm()
    if sep <= 1e-12:
        raise NonDifferentiableError("gradient undefined at coincident points")
    if isinstance(world, FreePlane):
        g = (a - b).unit()
        return g, Point2(-g.x, -g.y)
    if isinstance(world, CornerWedge):
        _require_inside(world, a)
        _require_inside(world, b)
        if a.norm() <= EDGE_TOL or b.norm() <= EDGE_TOL:
            raise NonDifferentiableError("gradient undefined at the wedge vertex")
        if abs(wedge_theta(world, a) - wedge_theta(world, b)) <= math.pi:
            g = (a - b).unit()
            return g, Point2(-g.x, -g.y)
        return a.unit(), b.unit()
    return _polygon_gradients(world, a, b)


def _polygon_gradients(world: PolygonWorld, a: Point2, b: Point2):
    for v in world.vertices():
        if (a - v).norm() <= EDGE_TOL or (b - v).norm() <= EDGE_TOL:
            raise NonDifferentiableError("gradient undefined at an obstacle vertex")
    path = _polygon_shortest_path(world, a, b)
    d_star = path.length

    def side_dir(point: Point2, other: Point2) -> Point2:
        cands = _first_hop_candidates(world, point, other)
        keep = [(L, w) for L, w in cands if L <= d_star * (1.0 + TIE_REL_TOL)]
        dirs = [(point - w).unit() for _, w in keep]
        base = dirs[0]
        for d in dirs[1:]:
            if math.hypot(d.x - base.x, d.y - base.y) > TIE_ANGLE_TOL:
                raise NonDifferentiableError("two shortest paths tie at the point")
        return base

    return side_dir(a, b), side_dir(b, a)


# ---------------------------------------------------------------------------
# batch helpers (generic-position assumption; used by grid oracles)


def _as_pts(pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def contains_batch(world: World, pts) -> np.ndarray:
    arr = _as_pts(pts)
    if isinstance(world, FreePlane):
        return np.ones(len(arr), dtype=bool)
    if isinstance(world, CornerWedge):
        theta = np.mod(np.arctan2(arr[:, 1], arr[:, 0]), TWO_PI)
        rho = np.hypot(arr[:, 0], arr[:, 1])
        ok = (theta >= world.theta0) & (theta <= TWO_PI - world.theta0)
        return ok | (rho <= EDGE_TOL)
    out = np.ones(len(arr), dtype=bool)
    for poly in world.obstacles:
        px = np.array([v.x for v in poly])
        py = np.array([v.y for v in poly])
        qx = np.roll(px, -1)
        qy = np.roll(py, -1)
        inside = np.zeros(len(arr), dtype=bool)
        for i in range(len(poly)):
            cond = (py[i] > arr[:, 1]) != (qy[i] > arr[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = px[i] + (arr[:, 1] - py[i]) * (qx[i] - px[i]) / (qy[i] - py[i])
            inside ^= cond & (arr[:, 0] < xi)
        out &= ~inside
    return out


def _visible_batch_polygon(world: PolygonWorld, anchor: Point2, arr: np.ndarray) -> np.ndarray:
    """Proper-crossing test of segments [anchor, p_i] against all edges."""
    blocked = np.zeros(len(arr), dtype=bool)
    ax, ay = anchor.x, anchor.y
    rx = arr[:, 0] - ax
    ry = arr[:, 1] - ay
    for poly in world.obstacles:
        n = len(poly)
        for i in range(n):
            e0, e1 = poly[i], poly[(i + 1) % n]
            sx, sy = e1.x - e0.x, e1.y - e0.y
            denom = rx * sy - ry * sx
            wx, wy = e0.x - ax, e0.y - ay
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (wx * sy - wy * sx) / denom
                u = (wx * ry - wy * rx) / denom
            hit = (np.abs(denom) > 1e-15) & (t > 1e-12) & (t < 1 - 1e-12) & (u > 1e-12) & (u < 1 - 1e-12)
            blocked |= hit
    return ~blocked


def visible_batch(world: World, anchor: Point2, pts) -> np.ndarray:
    arr = _as_pts(pts)
    if isinstance(world, FreePlane):
        return np.ones(len(arr), dtype=bool)
    if isinstance(world, CornerWedge):
        ta = wedge_theta(world, anchor) if anchor.norm() > 0 else None
        theta = np.mod(np.arctan2(arr[:, 1], arr[:, 0]), TWO_PI)
        if ta is None:
            return np.ones(len(arr), dtype=bool)
        rho = np.hypot(arr[:, 0], arr[:, 1])
        return (np.abs(theta - ta) <= math.pi) | (rho == 0.0)
    return _visible_batch_polygon(world, anchor, arr)


def distance_batch(world: World, anchor: Point2, pts) -> np.ndarray:
    """d(anchor, p_i) for an array of points."""
    arr = _as_pts(pts)
    direct = np.hypot(arr[:, 0] - anchor.x, arr[:, 1] - anchor.y)
    if isinstance(world, FreePlane):
        return direct
    if isinstance(world, CornerWedge):
        vis = visible_batch(world, anchor, arr)
        rho = np.hypot(arr[:, 0], arr[:, 1])
        return np.where(vis, direct, rho + anchor.norm())
    verts, dist, _ = _vertex_graph(world)
    vis_anchor = _visible_vertices(world, anchor)
    if not vis_anchor:
        raise ValueError("anchor sees no obstacle vertex; cannot route")
    d_to_anchor = np.full(len(verts), np.inf)
    for j in range(len(verts)):
        best = (verts[j] - anchor).norm() if not any(
            _segment_blocked(poly, verts[j], anchor) for poly in world.obstacles) else math.inf
        for i in vis_anchor:
            if np.isfinite(dist[j, i]):
                best = min(best, dist[j, i] + (verts[i] - anchor).norm())
        d_to_anchor[j] = best
    vis = _visible_batch_polygon(world, anchor, arr)
    out = np.where(vis, direct, np.inf)
    for j, v in enumerate(verts):
        leg = np.hypot(arr[:, 0] - v.x, arr[:, 1] - v.y)
        vis_v = _visible_batch_polygon(world, v, arr)
        cand = np.where(vis_v, leg + d_to_anchor[j], np.inf)
        out = np.minimum(out, cand)
    return out
