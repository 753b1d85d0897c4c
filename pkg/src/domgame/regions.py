"""Dominance regions, their boundary curves, and ray-boundary intersections.

The evader's dominance region is the set where the pursuer's shortest-path
distance exceeds alpha times the evader's, beyond the capture radius. In the
free plane its boundary is an Apollonius circle (or a convex oval when the
capture radius is positive). In the corner-wedge world the boundary splices
arcs of an Apollonius circle, ovals focused at the obstacle vertex, and (when
the vertex is interior to the region) a circle centered on the vertex. For
general polygon worlds the boundary is extracted numerically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geom import (
    ORIGIN,
    CornerWedge,
    FreePlane,
    OutsideWorldError,
    Point2,
    World,
    contains_batch,
    contains_point,
    distance,
    distance_batch,
    from_polar,
    wedge_theta,
)

TWO_PI = 2.0 * math.pi

RAY_RESIDUAL = 1e-12
RAY_MAX_ITER = 200
SECTOR_TOL = 1e-9


class BracketFailureError(RuntimeError):
    """No sign change found inside the analytic outer bound."""


class DegenerateRegionError(ValueError):
    """Separation does not exceed the capture radius."""


class OutsideSectorError(ValueError):
    """Point lies outside the angular sector on which f is defined."""


class RegionSide(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class ApolloniusCircle:
    """Locus of points whose distance to focus_p is alpha times that to focus_e."""

    focus_p: Point2
    focus_e: Point2
    alpha: float

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        if (self.focus_p - self.focus_e).norm() <= 1e-15:
            raise ValueError("coincident foci")

    @property
    def center(self) -> Point2:
        a2 = self.alpha * self.alpha
        return Point2(
            (a2 * self.focus_e.x - self.focus_p.x) / (a2 - 1.0),
            (a2 * self.focus_e.y - self.focus_p.y) / (a2 - 1.0),
        )

    @property
    def radius(self) -> float:
        a2 = self.alpha * self.alpha
        return self.alpha * (self.focus_p - self.focus_e).norm() / (a2 - 1.0)


class OvalKind(enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class OvalCurve:
    """Bipolar locus |S - outer| - alpha |S - inner| = offset.

    First type: offset in [0, |PQ|), a strictly convex closed curve with the
    outer focus outside. Second type: offset < 0, closed but not convex; for
    offsets at or below -alpha |PQ| the curve encloses both foci (this occurs
    when a region swallows the obstacle vertex).
    """

    kind: OvalKind
    outer_focus: Point2
    inner_focus: Point2
    alpha: float
    offset: float

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        gap = (self.outer_focus - self.inner_focus).norm()
        if self.kind is OvalKind.FIRST and not (0.0 <= self.offset < gap):
            raise ValueError("first-type offset must lie in [0, |PQ|)")
        if self.kind is OvalKind.SECOND and not self.offset < 0.0:
            raise ValueError("second-type offset must be negative")

    def residual(self, x: Point2) -> float:
        return (x - self.outer_focus).norm() - self.alpha * (x - self.inner_focus).norm() - self.offset


@dataclass(frozen=True)
class CircleAtVertex:
    center: Point2
    radius: float


@dataclass(frozen=True)
class DominanceRegion:
    """Level-set descriptor of the evader's dominance region."""

    world: World
    x_p: Point2
    x_e: Point2
    alpha: float
    capture_radius: float = 0.0

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        if self.capture_radius < 0.0:
            raise ValueError("capture radius must be non-negative")
        if not isinstance(self.world, FreePlane) and self.capture_radius != 0.0:
            raise ValueError("capture radius must be zero in worlds with obstacles")
        if not contains_point(self.world, self.x_p):
            raise OutsideWorldError("pursuer outside the playable region")
        if not contains_point(self.world, self.x_e):
            raise OutsideWorldError("evader outside the playable region")
        if distance(self.world, self.x_p, self.x_e) <= self.capture_radius:
            raise DegenerateRegionError("separation must exceed the capture radius")

    def outer_reach(self) -> float:
        """Radius bound: the region lies within this geodesic reach of x_e."""
        d0 = distance(self.world, self.x_p, self.x_e)
        return (d0 + self.capture_radius) / (self.alpha - 1.0)


@dataclass(frozen=True)
class BoundaryArc:
    """One maximal boundary piece lying on a single analytic curve."""

    arc_type: str  # "apollonius" | "oval" | "vertex_circle" | "untyped"
    curve: Optional[object]
    param_interval: tuple
    param_origin: str  # "evader_ray" | "vertex_ray" | "grid"
    points: tuple
    residuals: tuple

    @property
    def endpoints(self) -> tuple:
        return self.points[0], self.points[-1]


@dataclass(frozen=True)
class BoundaryGeometry:
    arcs: tuple
    points: tuple
    residuals: tuple

    def arc_types(self):
        return [a.arc_type for a in self.arcs]


# ---------------------------------------------------------------------------
# level-set evaluation


def phi(region: DominanceRegion, x: Point2) -> float:
    """d(x, x_p) - alpha d(x, x_e) - l; positive inside the open region."""
    if not contains_point(region.world, x):
        raise OutsideWorldError("phi is defined on the playable region only")
    return (
        distance(region.world, x, region.x_p)
        - region.alpha * distance(region.world, x, region.x_e)
        - region.capture_radius
    )


def phi_batch(region: DominanceRegion, pts: np.ndarray) -> np.ndarray:
    """Vectorized phi; NaN outside the playable region."""
    arr = np.asarray(pts, dtype=float)
    ok = contains_batch(region.world, arr)
    out = np.full(len(arr), np.nan)
    if ok.any():
        sel = arr[ok]
        out[ok] = (
            distance_batch(region.world, region.x_p, sel)
            - region.alpha * distance_batch(region.world, region.x_e, sel)
            - region.capture_radius
        )
    return out


def classify(region: DominanceRegion, x: Point2, tol: float = 1e-9) -> RegionSide:
    v = phi(region, x)
    if abs(v) <= tol:
        return RegionSide.BOUNDARY
    return RegionSide.INSIDE if v > 0.0 else RegionSide.OUTSIDE


def apollonius_of(x_p: Point2, x_e: Point2, alpha: float) -> ApolloniusCircle:
    return ApolloniusCircle(x_p, x_e, alpha)


# ---------------------------------------------------------------------------
# corner-world sector machinery


def eta_m(x_p: Point2, x_e: Point2, alpha: float) -> float:
    """Half-angle at the vertex of the sector containing the second-type oval."""
    rho_p = x_p.norm()
    rho_e = x_e.norm()
    if rho_e == 0.0:
        raise ValueError("evader at the vertex")
    if rho_p > alpha * rho_e:
        raise ValueError("requires |x_p| <= alpha |x_e|")
    radicand = (alpha * alpha - 1.0) * (alpha * alpha * rho_e * rho_e - rho_p * rho_p)
    arg = (math.sqrt(max(0.0, radicand)) - rho_p) / (alpha * alpha * rho_e)
    return math.acos(max(-1.0, min(1.0, arg)))


def _signed_angle(u: Point2, v: Point2) -> float:
    """Angle from u to v, wrapped to (-pi, pi]."""
    return math.atan2(u.cross(v), u.dot(v))


def _f_pieces(x_p: Point2, x_e: Point2, alpha: float, x: Point2):
    """(value, on_apollonius_branch) of the spliced defining function.

    The branch seam sits where x, x_p and the vertex are collinear. Angles are
    continued past the wedge cut by measuring x against the x_e direction and
    comparing with the raw world-angle offset of x_p, so the split stays
    consistent on both sides of the obstacle.
    """
    rho_p = x_p.norm()
    if x.norm() == 0.0:
        return rho_p - alpha * x_e.norm(), True  # both branches agree at the vertex
    if rho_p == 0.0:
        return x.norm() - alpha * (x - x_e).norm(), True
    delta = _signed_angle(x_e, x)
    theta_e = math.atan2(x_e.y, x_e.x) % TWO_PI
    theta_p = math.atan2(x_p.y, x_p.x) % TWO_PI
    delta_pe = theta_p - theta_e
    if abs(delta - delta_pe) <= math.pi:
        return (x - x_p).norm() - alpha * (x - x_e).norm(), True
    return x.norm() + rho_p - alpha * (x - x_e).norm(), False


def f_value(x_p: Point2, x_e: Point2, alpha: float, x: Point2) -> float:
    """Piecewise defining function of the spliced boundary curve.

    Defined on the sector of half-angle eta_m around the x_e direction; equals
    the dominance level set on the playable part of that sector.
    """
    rho_p = x_p.norm()
    rho_e = x_e.norm()
    if rho_p >= alpha * rho_e:
        raise ValueError("requires |x_p| < alpha |x_e|")
    if x.norm() > 0.0:
        if abs(_signed_angle(x_e, x)) > eta_m(x_p, x_e, alpha) + SECTOR_TOL:
            raise OutsideSectorError("point outside the defining sector")
    value, _ = _f_pieces(x_p, x_e, alpha, x)
    return value


@dataclass(frozen=True)
class FSet:
    """Spliced region whose boundary carries the corner-world strategy."""

    x_p: Point2
    x_e: Point2
    alpha: float
    eta: float = field(init=False)

    def __post_init__(self):
        if self.x_p.norm() >= self.alpha * self.x_e.norm():
            raise ValueError("requires |x_p| < alpha |x_e|")
        object.__setattr__(self, "eta", eta_m(self.x_p, self.x_e, self.alpha))

    @property
    def sector(self) -> tuple:
        base = math.atan2(self.x_e.y, self.x_e.x)
        return base - self.eta, base + self.eta

    def value(self, x: Point2) -> float:
        return f_value(self.x_p, self.x_e, self.alpha, x)

    def boundary_point(self, direction: Point2) -> Point2:
        pt, _ = corner_ray_hit(self.x_p, self.x_e, self.alpha, direction)
        return pt


# ---------------------------------------------------------------------------
# root finding along rays


def _hybrid_root(fn, lo: float, hi: float, f_lo: float, f_hi: float,
                 residual: float = RAY_RESIDUAL, max_iter: int = RAY_MAX_ITER) -> float:
    """Root of fn on [lo, hi] with fn(lo) > 0 > fn(hi); bisection with secant steps."""
    x0, f0 = lo, f_lo
    x1, f1 = hi, f_hi
    best_x, best_f = (x0, f0) if abs(f0) < abs(f1) else (x1, f1)
    for _ in range(max_iter):
        if abs(best_f) <= residual:
            return best_x
        mid = None
        if f0 != f1:
            sec = x1 - f1 * (x1 - x0) / (f1 - f0)
            if lo < sec < hi:
                mid = sec
        if mid is None or not (lo < mid < hi):
            mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if abs(fm) < abs(best_f):
            best_x, best_f = mid, fm
        if fm > 0.0:
            lo = mid
        else:
            hi = mid
        x0, f0 = x1, f1
        x1, f1 = mid, fm
        if hi - lo <= 1e-16 * max(1.0, abs(hi)):
            return best_x
    return best_x


def _free_ray_param(x_p: Point2, x_e: Point2, alpha: float, l: float, u: Point2) -> float:
    """Exact parameter of the ray-boundary hit, s > 0 on x_e + s u.

    The defining equation |x_e + s u - x_p| = alpha s + l is quadratic in s
    with exactly one positive root, so no iteration is needed.
    """
    e = x_e - x_p
    a = 1.0 - alpha * alpha
    b = 2.0 * (e.dot(u) - alpha * l)
    c = e.dot(e) - l * l
    disc = b * b - 4.0 * a * c
    root = math.sqrt(max(0.0, disc))
    s = (-b - root) / (2.0 * a)
    return s


def corner_ray_hit(x_p: Point2, x_e: Point2, alpha: float, direction: Point2):
    """Unique intersection of the evader ray with the spliced boundary curve.

    Returns (point, branch) with branch "apollonius" or "oval". Requires the
    vertex outside the region closure, i.e. |x_p| < alpha |x_e|.
    """
    rho_p = x_p.norm()
    rho_e = x_e.norm()
    if rho_p >= alpha * rho_e:
        raise ValueError("requires |x_p| < alpha |x_e|")
    u = direction.unit()

    def at(s: float) -> Point2:
        return Point2(x_e.x + s * u.x, x_e.y + s * u.y)

    # outer bracket on the second-type oval: |x| + |x_p| - alpha s is strictly
    # decreasing along the ray
    def c_fn(s: float) -> float:
        return at(s).norm() + rho_p - alpha * s

    s_hi = (rho_e + rho_p) / (alpha - 1.0) + 1.0
    f_hi = c_fn(s_hi)
    if f_hi > 0.0:
        raise BracketFailureError("no sign change on the oval bound")
    s_c = _hybrid_root(c_fn, 0.0, s_hi, c_fn(0.0), f_hi, residual=1e-14)

    def h_fn(s: float) -> float:
        return _f_pieces(x_p, x_e, alpha, at(s))[0]

    # f never exceeds the oval branch value, so nudging past s_c guarantees a
    # negative bracket end even when the root sits exactly on the oval
    h0 = h_fn(0.0)
    s_end = s_c * (1.0 + 1e-9) + 1e-12
    h1 = h_fn(s_end)
    if h1 > 0.0:
        s_end = s_c * (1.0 + 1e-6) + 1e-9
        h1 = h_fn(s_end)
        if h1 > 0.0:
            raise BracketFailureError("defining function positive past the oval bound")
    if h0 <= 0.0:
        s_star = 0.0
    else:
        s_star = _hybrid_root(h_fn, 0.0, s_end, h0, h1)
    pt = at(s_star)
    _, on_circle = _f_pieces(x_p, x_e, alpha, pt)
    return pt, "apollonius" if on_circle else "oval"


def ray_boundary_intersection(region: DominanceRegion, direction: Point2) -> Point2:
    """Boundary point on the ray from x_e along the given direction.

    Free plane: the unique crossing of the convex level curve. Corner world:
    the unique crossing of the spliced curve (which may leave the playable
    region behind the obstacle); requires the vertex outside the closure.
    """
    u = direction.unit()
    if isinstance(region.world, FreePlane):
        s = _free_ray_param(region.x_p, region.x_e, region.alpha, region.capture_radius, u)
        if s <= 0.0:
            raise BracketFailureError("ray does not leave the region")
        return Point2(region.x_e.x + s * u.x, region.x_e.y + s * u.y)
    if isinstance(region.world, CornerWedge):
        pt, _ = corner_ray_hit(region.x_p, region.x_e, region.alpha, u)
        return pt
    raise ValueError("ray intersection is defined for free-plane and corner worlds")


# ---------------------------------------------------------------------------
# boundary construction


def boundary_arcs(region: DominanceRegion, n_samples: int = 720) -> BoundaryGeometry:
    """Typed boundary arcs plus a sampled polyline.

    Free plane: one closed curve (Apollonius circle at zero capture radius,
    first-type oval otherwise). Corner wedge: exact typed arcs split where the
    shortest-path combinatorics change, clipped at the obstacle edges. Polygon
    worlds: numeric contour, arcs tagged untyped.
    """
    if isinstance(region.world, FreePlane):
        return _free_boundary(region, n_samples)
    if isinstance(region.world, CornerWedge):
        return _corner_boundary(region, n_samples)
    return _polygon_boundary(region, n_samples)


def _finish(arcs) -> BoundaryGeometry:
    pts = []
    res = []
    for a in arcs:
        pts.extend(a.points)
        res.extend(a.residuals)
    return BoundaryGeometry(tuple(arcs), tuple(pts), tuple(res))


def _free_boundary(region: DominanceRegion, n: int) -> BoundaryGeometry:
    x_p, x_e, alpha, l = region.x_p, region.x_e, region.alpha, region.capture_radius
    betas = np.linspace(0.0, TWO_PI, max(n, 16) + 1)
    pts = []
    res = []
    for b in betas:
        u = Point2(math.cos(b), math.sin(b))
        s = _free_ray_param(x_p, x_e, alpha, l, u)
        q = Point2(x_e.x + s * u.x, x_e.y + s * u.y)
        pts.append(q)
        res.append((q - x_p).norm() - alpha * (q - x_e).norm() - l)
    if l == 0.0:
        arc_type = "apollonius"
        curve: object = apollonius_of(x_p, x_e, alpha)
    else:
        arc_type = "oval"
        curve = OvalCurve(OvalKind.FIRST, x_p, x_e, alpha, l)
    arc = BoundaryArc(arc_type, curve, (0.0, TWO_PI), "evader_ray", tuple(pts), tuple(res))
    return _finish([arc])


# --- corner construction ----------------------------------------------------


class _CornerFrame:
    """Scalar helpers for sweeping the corner-world boundary."""

    def __init__(self, region: DominanceRegion):
        self.world: CornerWedge = region.world
        self.x_p = region.x_p
        self.x_e = region.x_e
        self.alpha = region.alpha
        self.theta0 = self.world.theta0
        self.rho_e = self.x_e.norm()
        self.rho_p = self.x_p.norm()
        self.theta_e = wedge_theta(self.world, self.x_e)
        self.theta_p = wedge_theta(self.world, self.x_p) if self.rho_p > 0 else None
        self.phi_vertex = self.rho_p - self.alpha * self.rho_e
        self.s_max = (distance(self.world, self.x_e, self.x_p)) / (self.alpha - 1.0) + 1.0
        self.e_up = from_polar(1.0, self.theta0)
        self.e_dn = from_polar(1.0, -self.theta0)

    def d_to_p(self, x: Point2) -> float:
        if self.rho_p == 0.0:
            return x.norm()
        if x.norm() == 0.0:
            return self.rho_p
        t = math.atan2(x.y, x.x) % TWO_PI
        if abs(t - self.theta_p) <= math.pi:
            return (x - self.x_p).norm()
        return x.norm() + self.rho_p

    def p_visible(self, x: Point2) -> bool:
        if self.rho_p == 0.0 or x.norm() == 0.0:
            return True
        t = math.atan2(x.y, x.x) % TWO_PI
        return abs(t - self.theta_p) <= math.pi

    def ray_exit(self, u: Point2) -> float:
        """Parameter where the evader ray first leaves the playable region."""
        best = math.inf
        for e in (self.e_up, self.e_dn):
            denom = u.cross(e)
            if abs(denom) < 1e-15:
                continue
            # solve x_e + s u = t e by crossing with e and with u
            s = e.cross(self.x_e) / denom
            t = u.cross(self.x_e) / denom
            if s > 1e-12 and t > 1e-12:
                best = min(best, s)
        # passing exactly through the vertex: blocked iff the continuation
        # direction points into the obstacle gap
        cross_to_vertex = self.x_e.cross(u)
        if abs(cross_to_vertex) <= 1e-14 * max(1.0, self.rho_e) and self.x_e.dot(u) < 0.0:
            tc = math.atan2(u.y, u.x) % TWO_PI
            if not (self.theta0 <= tc <= TWO_PI - self.theta0):
                best = min(best, self.rho_e)
        return best

    def psi(self, u: Point2, s: float) -> float:
        x = Point2(self.x_e.x + s * u.x, self.x_e.y + s * u.y)
        return self.d_to_p(x) - self.alpha * s

    def visible_hit(self, beta: float):
        """Boundary point along a straight evader ray, or None when the ray
        leaves the region while still inside it."""
        u = Point2(math.cos(beta), math.sin(beta))
        s_cap = min(self.ray_exit(u), self.s_max)
        f_lo = self.psi(u, 0.0)
        f_hi = self.psi(u, s_cap)
        if f_hi > 0.0:
            return None
        s = _hybrid_root(lambda t: self.psi(u, t), 0.0, s_cap, f_lo, f_hi)
        return Point2(self.x_e.x + s * u.x, self.x_e.y + s * u.y)

    def shadow_hit(self, theta: float) -> Point2:
        """Boundary point along a vertex ray in the evader's shadow."""
        e = from_polar(1.0, theta)

        def g(rho: float) -> float:
            x = Point2(rho * e.x, rho * e.y)
            return self.d_to_p(x) - self.alpha * (rho + self.rho_e)

        hi = max(0.0, (self.rho_p - self.alpha * self.rho_e) / (self.alpha - 1.0)) + 1.0
        f_hi = g(hi)
        if f_hi > 0.0:
            raise BracketFailureError("shadow ray never leaves the region")
        rho = _hybrid_root(g, 0.0, hi, g(0.0), f_hi)
        return Point2(rho * e.x, rho * e.y)

    def phi_of(self, x: Point2) -> float:
        return self.d_to_p(x) - self.alpha * distance(self.world, x, self.x_e)


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


def _corner_arc_type(frame: _CornerFrame, evader_visible: bool, x_mid: Point2):
    p_vis = frame.p_visible(x_mid)
    if evader_visible and p_vis:
        return "apollonius", ApolloniusCircle(frame.x_p, frame.x_e, frame.alpha)
    if evader_visible and not p_vis:
        return "oval", OvalCurve(OvalKind.SECOND, ORIGIN, frame.x_e, frame.alpha, -frame.rho_p)
    if p_vis:
        return "oval", OvalCurve(OvalKind.FIRST, frame.x_p, ORIGIN, frame.alpha,
                                 frame.alpha * frame.rho_e)
    radius = (frame.rho_p - frame.alpha * frame.rho_e) / (frame.alpha - 1.0)
    return "vertex_circle", CircleAtVertex(ORIGIN, radius)


def _corner_boundary(region: DominanceRegion, n: int) -> BoundaryGeometry:
    frame = _CornerFrame(region)
    theta0 = frame.theta0
    theta_e = frame.theta_e

    # evader shadow: the angular span of the region hidden from x_e
    shadow = None
    theta_b = None
    if theta_e > math.pi + theta0:
        shadow = (theta0, theta_e - math.pi)
        theta_b = theta_e - math.pi
    elif theta_e < math.pi - theta0:
        shadow = (theta_e + math.pi, TWO_PI - theta0)
        theta_b = theta_e + math.pi

    pieces = []

    # ---- shadow family (present only when the vertex is inside the region)
    if frame.phi_vertex > 0.0 and shadow is not None:
        cuts = [shadow[0], shadow[1]]
        if frame.theta_p is not None:
            for seam in (frame.theta_p - math.pi, frame.theta_p + math.pi):
                if shadow[0] + 1e-12 < seam < shadow[1] - 1e-12:
                    cuts.append(seam)
        cuts = sorted(set(cuts))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            m = max(8, int(n * (hi - lo) / TWO_PI))
            thetas = np.linspace(lo, hi, m + 1)
            pts = [frame.shadow_hit(float(t)) for t in thetas]
            mid = frame.shadow_hit(0.5 * (lo + hi))
            arc_type, curve = _corner_arc_type(frame, False, mid)
            res = tuple(frame.phi_of(p) for p in pts)
            pieces.append(BoundaryArc(arc_type, curve, (lo, hi), "vertex_ray", tuple(pts), res))

    # ---- visible family: sweep evader-ray directions
    n_scan = max(n, 720)
    grid = np.linspace(0.0, TWO_PI, n_scan, endpoint=False)
    status = []
    for b in grid:
        pt = frame.visible_hit(float(b))
        status.append((float(b), pt))

    # breakpoints: blocked transitions, pursuer-seam crossings, the through-vertex ray
    breaks = set()
    beta_o = (theta_e + math.pi) % TWO_PI
    if frame.phi_vertex >= 0.0:
        breaks.add(beta_o)

    def refine_blocked(b_lo: float, b_hi: float) -> float:
        def g(b: float) -> float:
            u = Point2(math.cos(b), math.sin(b))
            s_cap = min(frame.ray_exit(u), frame.s_max)
            return frame.psi(u, s_cap)

        g_lo = g(b_lo)
        lo, hi = b_lo, b_hi
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if (g(mid) > 0.0) == (g_lo > 0.0):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def refine_seam(b_lo: float, b_hi: float) -> float:
        def t(b: float) -> float:
            pt = frame.visible_hit(b)
            if pt is None or pt.norm() == 0.0:
                return 0.0
            tx = math.atan2(pt.y, pt.x) % TWO_PI
            return math.pi - abs(tx - frame.theta_p)

        t_lo = t(b_lo)
        lo, hi = b_lo, b_hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (t(mid) > 0.0) == (t_lo > 0.0):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    for k in range(n_scan):
        b0, p0 = status[k]
        b1, p1 = status[(k + 1) % n_scan]
        if b1 < b0:
            b1 += TWO_PI
        if (p0 is None) != (p1 is None):
            breaks.add(refine_blocked(b0, b1) % TWO_PI)
        elif p0 is not None and p1 is not None and frame.theta_p is not None:
            if frame.p_visible(p0) != frame.p_visible(p1):
                breaks.add(refine_seam(b0, b1) % TWO_PI)

    ordered = sorted(breaks)
    deduped = []
    for b in ordered:  # refined transitions can land on top of structural seams
        if not deduped or b - deduped[-1] > 1e-9:
            deduped.append(b)
    if len(deduped) > 1 and deduped[0] + TWO_PI - deduped[-1] <= 1e-9:
        deduped.pop()
    ordered = deduped
    if not ordered:
        spans = [(0.0, TWO_PI)]
    else:
        spans = []
        for i, lo in enumerate(ordered):
            hi = ordered[(i + 1) % len(ordered)]
            if hi <= lo:
                hi += TWO_PI
            spans.append((lo, hi))

    for lo, hi in spans:
        mid_beta = 0.5 * (lo + hi)
        mid_pt = frame.visible_hit(mid_beta % TWO_PI)
        if mid_pt is None:
            continue  # blocked span: the boundary runs along the obstacle edge
        m = max(8, int(n * (hi - lo) / TWO_PI))
        eps = min(1e-9, (hi - lo) * 1e-6)
        betas = np.linspace(lo + eps, hi - eps, m + 1)
        pts = [frame.visible_hit(float(b) % TWO_PI) for b in betas]
        pts = [p for p in pts if p is not None]
        if len(pts) < 2:
            continue
        arc_type, curve = _corner_arc_type(frame, True, mid_pt)
        res = tuple(frame.phi_of(p) for p in pts)
        pieces.append(BoundaryArc(arc_type, curve, (lo, hi), "evader_ray", tuple(pts), res))

    pieces = _snap_junctions(frame, pieces)
    return _finish(_chain_pieces(frame, pieces))


def _snap_junctions(frame: _CornerFrame, pieces):
    """Replace arc end samples by exactly computed junction/edge points."""
    out = []
    for arc in pieces:
        pts = list(arc.points)
        res = list(arc.residuals)
        for idx in (0, -1):
            p = pts[idx]
            snapped = _snap_point(frame, p)
            if snapped is not None:
                pts[idx] = snapped
                res[idx] = frame.phi_of(snapped)
        out.append(BoundaryArc(arc.arc_type, arc.curve, arc.param_interval,
                               arc.param_origin, tuple(pts), tuple(res)))
    return out


def _snap_point(frame: _CornerFrame, p: Point2):
    """Project a near-junction sample onto the exact seam or edge ray."""
    if p.norm() == 0.0:
        return None
    t = math.atan2(p.y, p.x) % TWO_PI
    candidates = [frame.theta0, TWO_PI - frame.theta0]
    if frame.theta_p is not None:
        candidates += [(frame.theta_p - math.pi) % TWO_PI, (frame.theta_p + math.pi) % TWO_PI]
    candidates += [(frame.theta_e - math.pi) % TWO_PI, (frame.theta_e + math.pi) % TWO_PI]
    for tc in candidates:
        if abs(_wrap_angle(t - tc)) < 1e-6:
            e = from_polar(1.0, tc)

            def g(rho: float) -> float:
                x = Point2(rho * e.x, rho * e.y)
                return frame.phi_of(x)

            r = p.norm()
            lo, hi = 0.5 * r, 2.0 * r
            g_lo, g_hi = g(lo), g(hi)
            if g_lo > 0.0 > g_hi:
                rho = _hybrid_root(g, lo, hi, g_lo, g_hi)
                return Point2(rho * e.x, rho * e.y)
    return None


def _chain_pieces(frame: _CornerFrame, pieces):
    """Order arc pieces into a connected chain, starting from an obstacle edge."""
    if not pieces:
        return pieces
    remaining = list(pieces)

    def on_edge(p: Point2) -> bool:
        if p.norm() == 0.0:
            return True
        t = math.atan2(p.y, p.x) % TWO_PI
        return min(abs(t - frame.theta0), abs(t - (TWO_PI - frame.theta0))) < 1e-6

    def upper_edge_key(arc):
        a, b = arc.endpoints
        score = []
        for p in (a, b):
            if on_edge(p):
                t = math.atan2(p.y, p.x) % TWO_PI if p.norm() > 0 else frame.theta0
                score.append(t)
        return min(score) if score else math.inf

    start = min(remaining, key=upper_edge_key)
    if math.isinf(upper_edge_key(start)):
        start = remaining[0]
    chain = [start]
    remaining.remove(start)
    # orient the start arc so its free (edge) endpoint comes first
    if on_edge(start.points[-1]) and not on_edge(start.points[0]):
        chain[0] = _reverse_arc(start)
    while remaining:
        tail = chain[-1].points[-1]
        best = None
        best_d = math.inf
        for arc in remaining:
            for flipped in (False, True):
                head = arc.points[-1] if flipped else arc.points[0]
                d = (head - tail).norm()
                if d < best_d:
                    best_d = d
                    best = (arc, flipped)
        arc, flipped = best
        remaining.remove(arc)
        chain.append(_reverse_arc(arc) if flipped else arc)
    return chain


def _reverse_arc(arc: BoundaryArc) -> BoundaryArc:
    return BoundaryArc(arc.arc_type, arc.curve, (arc.param_interval[1], arc.param_interval[0]),
                       arc.param_origin, tuple(reversed(arc.points)), tuple(reversed(arc.residuals)))


# --- polygon construction ---------------------------------------------------

_MS_SEGMENTS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def _polygon_boundary(region: DominanceRegion, n: int) -> BoundaryGeometry:
    """Marching-squares contour of phi = 0, vertices refined along grid edges."""
    world = region.world
    reach = region.outer_reach() + 0.5
    cx, cy = region.x_e.x, region.x_e.y
    n_cells = 256
    xs = np.linspace(cx - reach, cx + reach, n_cells + 1)
    ys = np.linspace(cy - reach, cy + reach, n_cells + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = phi_batch(region, pts).reshape(n_cells + 1, n_cells + 1)

    # crossing grid edges: key -> (node+, node-)
    edge_nodes = {}

    def edge_key(i0, j0, i1, j1):
        return (i0, j0, i1, j1)

    segments = []
    for i in range(n_cells):
        for j in range(n_cells):
            v = [vals[i, j], vals[i + 1, j], vals[i + 1, j + 1], vals[i, j + 1]]
            if any(math.isnan(x) for x in v):
                continue
            code = sum(1 << k for k, x in enumerate(v) if x > 0.0)
            if code in (0, 15):
                continue
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            edges = [
                edge_key(*corners[0], *corners[1]),
                edge_key(*corners[1], *corners[2]),
                edge_key(*corners[3], *corners[2]),
                edge_key(*corners[0], *corners[3]),
            ]
            if code in (5, 10):  # saddle: split by the cell-center sign
                center = 0.25 * sum(v)
                if code == 5:
                    segs = [(3, 0), (1, 2)] if center > 0 else [(3, 2), (1, 0)]
                else:
                    segs = [(0, 1), (2, 3)] if center > 0 else [(0, 3), (2, 1)]
            else:
                segs = _MS_SEGMENTS[code]
            for e0, e1 in segs:
                for e in (e0, e1):
                    k = edges[e]
                    if k not in edge_nodes:
                        edge_nodes[k] = None
                segments.append((edges[e0], edges[e1]))

    if not segments:
        return BoundaryGeometry((), (), ())

    # refine every crossing point by bisection along its grid edge
    keys = list(edge_nodes.keys())
    p_lo = np.empty((len(keys), 2))
    p_hi = np.empty((len(keys), 2))
    for k, (i0, j0, i1, j1) in enumerate(keys):
        a = np.array([xs[i0], ys[j0]])
        b = np.array([xs[i1], ys[j1]])
        if vals[i0, j0] > 0.0:
            p_lo[k], p_hi[k] = a, b
        else:
            p_lo[k], p_hi[k] = b, a
    for _ in range(60):
        mid = 0.5 * (p_lo + p_hi)
        vm = phi_batch(region, mid)
        pos = vm > 0.0
        p_lo[pos] = mid[pos]
        p_hi[~pos] = mid[~pos]
    final = 0.5 * (p_lo + p_hi)
    final_res = phi_batch(region, final)
    for k, key in enumerate(keys):
        edge_nodes[key] = (Point2(*final[k]), float(final_res[k]))

    # chain segments into polylines
    adj = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    visited = set()
    arcs = []
    for start in adj:
        if start in visited:
            continue
        # walk the component from a chain end when one exists (open contours)
        ends = [k for k in _component_keys(adj, start) if len(adj[k]) == 1]
        head = ends[0] if ends else start
        component = _walk_chain(adj, head)
        visited.update(component)
        visited.add(start)
        pts = tuple(edge_nodes[k][0] for k in component)
        res = tuple(edge_nodes[k][1] for k in component)
        if len(pts) < 2:
            continue
        arcs.append(BoundaryArc("untyped", None, (0.0, float(len(pts) - 1)), "grid", pts, res))
    return _finish(arcs)


def _component_keys(adj, start):
    stack = [start]
    seen = {start}
    while stack:
        k = stack.pop()
        for nb in adj[k]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen


def _walk_chain(adj, head):
    chain = [head]
    prev = None
    cur = head
    while True:
        nxt = [nb for nb in adj[cur] if nb != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        if cur == head:
            chain.append(cur)
            break
        chain.append(cur)
    return chain
