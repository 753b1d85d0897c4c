"""Region level sets, boundary curves, and ray intersections."""

import math

import numpy as np
import pytest

from domgame.geom import (
    visible,
    ORIGIN,
    CornerWedge,
    FreePlane,
    Point2,
    PolygonWorld,
    contains_point,
    distance,
    from_polar,
    shortest_path,
)
from domgame.regions import (
    ApolloniusCircle,
    BracketFailureError,
    DominanceRegion,
    FSet,
    OutsideSectorError,
    OvalCurve,
    OvalKind,
    RegionSide,
    apollonius_of,
    boundary_arcs,
    classify,
    corner_ray_hit,
    eta_m,
    f_value,
    phi,
    ray_boundary_intersection,
)
from oracles import tangent_half_angle

DEG = math.pi / 180.0

# corner scenario with the obstacle vertex inside the region closure
WEDGE5 = CornerWedge(5 * DEG)
XP5 = Point2(4.0, 5.0)
XE5 = Point2(2.0, -1.0)
ALPHA5 = 1.5
REGION5 = DominanceRegion(WEDGE5, XP5, XE5, ALPHA5)

FREE = DominanceRegion(FreePlane(), Point2(0.0, 0.0), Point2(1.0, 0.0), 2.0)


def random_corner_config(rng, alpha_range=(1.2, 2.5)):
    """Admissible corner configuration with the vertex outside the closure."""
    world = CornerWedge(rng.uniform(3, 40) * DEG)
    alpha = rng.uniform(*alpha_range)
    lo, hi = world.theta0, 2 * math.pi - world.theta0
    x_e = from_polar(rng.uniform(0.5, 4.0), rng.uniform(lo, hi))
    while True:
        x_p = from_polar(rng.uniform(0.1, 0.98 * alpha * x_e.norm()), rng.uniform(lo, hi))
        if (x_p - x_e).norm() > 1e-3:
            return world, x_p, x_e, alpha


class TestPhi:
    def test_evader_position_dominates(self):
        assert phi(FREE, FREE.x_e) == pytest.approx(1.0)
        assert phi(REGION5, XE5) > 0.0

    def test_example5_origin_value(self):
        assert phi(REGION5, ORIGIN) == pytest.approx(math.sqrt(41.0) - 1.5 * math.sqrt(5.0), abs=1e-12)
        assert phi(REGION5, ORIGIN) > 0.0  # vertex inside the region

    def test_free_collinear_boundary(self):
        assert phi(FREE, Point2(2.0, 0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_far_point_outside(self):
        assert classify(REGION5, Point2(10.0, 10.0)) is RegionSide.OUTSIDE

    def test_classify_bands(self):
        assert classify(FREE, Point2(1.5, 0.0)) is RegionSide.INSIDE
        assert classify(FREE, Point2(2.0, 0.0)) is RegionSide.BOUNDARY


class TestApollonius:
    def test_closed_form(self):
        c = apollonius_of(Point2(0, 0), Point2(1, 0), 2.0)
        assert (c.center - Point2(4.0 / 3.0, 0.0)).norm() < 1e-12
        assert c.radius == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_sampled_points_satisfy_relation(self):
        c = apollonius_of(Point2(0.3, -0.7), Point2(1.4, 0.9), 1.7)
        for t in np.linspace(0, 2 * math.pi, 10, endpoint=False):
            x = Point2(c.center.x + c.radius * math.cos(t), c.center.y + c.radius * math.sin(t))
            assert abs((x - c.focus_p).norm() - c.alpha * (x - c.focus_e).norm()) < 1e-12

    def test_large_alpha_limit(self):
        c = apollonius_of(Point2(0, 0), Point2(1, 0), 100.0)
        assert c.radius < 0.011
        assert (c.center - Point2(1, 0)).norm() < 0.001

    def test_mirror_symmetry(self):
        c = apollonius_of(Point2(0.5, 2.0), Point2(-1.0, 1.0), 1.8)
        m = apollonius_of(Point2(0.5, -2.0), Point2(-1.0, -1.0), 1.8)
        assert (m.center - Point2(c.center.x, -c.center.y)).norm() < 1e-12
        assert m.radius == pytest.approx(c.radius, abs=1e-12)

    def test_coincident_foci_rejected(self):
        with pytest.raises(ValueError):
            apollonius_of(Point2(1, 1), Point2(1, 1), 2.0)


class TestRayIntersection:
    def test_free_forward(self):
        x = ray_boundary_intersection(FREE, Point2(1.0, 0.0))
        assert (x - Point2(2.0, 0.0)).norm() < 1e-12

    def test_free_backward(self):
        x = ray_boundary_intersection(FREE, Point2(-1.0, 0.0))
        assert (x - Point2(2.0 / 3.0, 0.0)).norm() < 1e-12

    def test_free_random_residuals(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            x_p = Point2(*rng.uniform(-4, 4, 2))
            x_e = Point2(*rng.uniform(-4, 4, 2))
            if (x_p - x_e).norm() < 0.3:
                continue
            alpha = rng.uniform(1.1, 3.0)
            l = rng.choice([0.0, 0.1])
            if (x_p - x_e).norm() <= l:
                continue
            region = DominanceRegion(FreePlane(), x_p, x_e, alpha, l)
            u = from_polar(1.0, rng.uniform(0, 2 * math.pi))
            x = ray_boundary_intersection(region, u)
            assert abs((x - x_p).norm() - alpha * (x - x_e).norm() - l) < 1e-10
            # hit sits on the ray
            assert (x - x_e).cross(u) == pytest.approx(0.0, abs=1e-9)

    def test_corner_random_residuals(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            world, x_p, x_e, alpha = random_corner_config(rng)
            u = from_polar(1.0, rng.uniform(0, 2 * math.pi))
            x_c, branch = corner_ray_hit(x_p, x_e, alpha, u)
            assert abs(f_value(x_p, x_e, alpha, x_c)) < 1e-10
            assert branch in ("apollonius", "oval")
            assert (x_c - x_e).cross(u) == pytest.approx(0.0, abs=1e-9)
            assert (x_c - x_e).dot(u) > 0.0


class TestEtaM:
    def test_degenerate_bound(self):
        x_e = Point2(0.0, -2.0)
        alpha = 1.6
        x_p = from_polar(alpha * 2.0, 2.0)
        assert eta_m(x_p, x_e, alpha) == pytest.approx(math.acos(-1.0 / alpha), abs=1e-12)

    def test_known_value(self):
        assert eta_m(Point2(0, 1), Point2(0, -1), 2.0) == pytest.approx(math.pi / 3.0, abs=1e-12)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            eta_m(Point2(10.0, 0.0), Point2(0.0, 1.0), 1.5)

    def test_matches_numeric_tangent(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            world, x_p, x_e, alpha = random_corner_config(rng)
            got = eta_m(x_p, x_e, alpha)
            oracle = tangent_half_angle(x_e, x_p.norm(), alpha)
            assert abs(got - oracle) < 1e-8


class TestFValue:
    def test_positive_at_evader(self):
        assert f_value(XP5, Point2(0.0, -3.0), 2.5, Point2(0.0, -3.0)) > 0.0

    def test_branch_agreement_on_seam(self):
        # on the line through the origin opposite x_p the two pieces coincide
        rng = np.random.default_rng(1)
        for _ in range(50):
            world, x_p, x_e, alpha = random_corner_config(rng)
            seam_dir = Point2(-x_p.x, -x_p.y).unit()
            for rho in (0.05, 0.2, 0.6):
                x = seam_dir.scaled(rho)
                try:
                    f_value(x_p, x_e, alpha, x)
                except OutsideSectorError:
                    continue
                a_val = (x - x_p).norm() - alpha * (x - x_e).norm()
                c_val = x.norm() + x_p.norm() - alpha * (x - x_e).norm()
                assert abs(a_val - c_val) < 1e-12

    def test_agrees_with_phi_on_visible_part_of_sector(self):
        # the spliced function equals the level set on the sector part seen
        # from x_e; the region closure lies entirely in that part, so this is
        # the identity the boundary construction rests on
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 10000:
            world, x_p, x_e, alpha = random_corner_config(rng)
            region = DominanceRegion(world, x_p, x_e, alpha)
            for _ in range(20):
                x = Point2(*rng.uniform(-5, 5, 2))
                if not contains_point(world, x):
                    continue
                if not visible(world, x, x_e):
                    continue
                try:
                    fv = f_value(x_p, x_e, alpha, x)
                except OutsideSectorError:
                    continue
                assert abs(fv - phi(region, x)) < 1e-12
                checked += 1

    def test_region_closure_is_visible_from_evader(self):
        # backing for the restriction above: with the vertex outside the
        # closure, points with phi >= 0 are always visible from x_e
        rng = np.random.default_rng(29)
        for _ in range(30):
            world, x_p, x_e, alpha = random_corner_config(rng)
            region = DominanceRegion(world, x_p, x_e, alpha)
            for _ in range(100):
                x = Point2(*rng.uniform(-6, 6, 2))
                if not contains_point(world, x):
                    continue
                if phi(region, x) >= 0.0:
                    assert visible(world, x, x_e)

    def test_outside_sector_rejected(self):
        x_p, x_e, alpha = Point2(0, 1), Point2(0, -1), 2.0
        # eta_m is 60 degrees here; 90 degrees off the x_e direction is outside
        with pytest.raises(OutsideSectorError):
            f_value(x_p, x_e, alpha, Point2(-2.0, 0.0))


class TestFSet:
    def test_boundary_is_closed_continuous_curve(self):
        rng = np.random.default_rng(12)
        world, x_p, x_e, alpha = random_corner_config(rng)
        fs = FSet(x_p, x_e, alpha)
        betas = np.linspace(0, 2 * math.pi, 400, endpoint=False)
        pts = [fs.boundary_point(from_polar(1.0, float(b))) for b in betas]
        gaps = [(pts[i] - pts[(i + 1) % len(pts)]).norm() for i in range(len(pts))]
        assert max(gaps) < 0.2  # no jumps: simple closed curve

    def test_boundary_on_circle_or_oval(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            world, x_p, x_e, alpha = random_corner_config(rng)
            fs = FSet(x_p, x_e, alpha)
            for b in rng.uniform(0, 2 * math.pi, 25):
                x = fs.boundary_point(from_polar(1.0, float(b)))
                a_res = abs((x - x_p).norm() - alpha * (x - x_e).norm())
                c_res = abs(x.norm() + x_p.norm() - alpha * (x - x_e).norm())
                assert min(a_res, c_res) < 1e-9


class TestBoundaryArcsFree:
    def test_zero_capture_radius_is_apollonius(self):
        geo = boundary_arcs(FREE, 256)
        assert geo.arc_types() == ["apollonius"]
        circle = geo.arcs[0].curve
        ref = apollonius_of(FREE.x_p, FREE.x_e, FREE.alpha)
        assert (circle.center - ref.center).norm() < 1e-12
        for p in geo.points:
            assert (p - ref.center).norm() == pytest.approx(ref.radius, abs=1e-9)

    def test_residuals_small(self):
        region = DominanceRegion(FreePlane(), Point2(-1, 2), Point2(1, 1), 1.4, 0.1)
        geo = boundary_arcs(region, 256)
        assert geo.arc_types() == ["oval"]
        assert max(abs(r) for r in geo.residuals) <= 1e-8

    def test_first_type_oval_chord_midpoints_inside(self):
        region = DominanceRegion(FreePlane(), Point2(0, 0), Point2(1, 0), 2.0, 0.1)
        rng = np.random.default_rng(21)
        pts = [ray_boundary_intersection(region, from_polar(1.0, b))
               for b in rng.uniform(0, 2 * math.pi, 2000)]
        for _ in range(1000):
            i, j = rng.integers(0, len(pts), 2)
            if i == j:
                continue
            mid = Point2(0.5 * (pts[i].x + pts[j].x), 0.5 * (pts[i].y + pts[j].y))
            if (mid - pts[i]).norm() < 1e-9:
                continue
            assert phi(region, mid) > 0.0


class TestBoundaryArcsCorner:
    def test_example5_structure(self):
        geo = boundary_arcs(REGION5, 720)
        assert geo.arc_types() == ["oval", "apollonius", "oval"]
        ab, bc, cd = geo.arcs
        a = ab.points[0]
        b = ab.points[-1]
        c = bc.points[-1]
        d = cd.points[-1]
        # chain endpoints shared
        assert (bc.points[0] - b).norm() < 1e-9
        assert (cd.points[0] - c).norm() < 1e-9
        # A and D on the obstacle edges
        t_a = math.atan2(a.y, a.x) % (2 * math.pi)
        t_d = math.atan2(d.y, d.x) % (2 * math.pi)
        assert abs(t_a - 5 * DEG) < 1e-6
        assert abs(t_d - (2 * math.pi - 5 * DEG)) < 1e-6
        # B on the extension of x_e--origin, beyond the origin
        assert abs(XE5.cross(b)) / (XE5.norm() * b.norm()) < 1e-6
        assert XE5.dot(b) < 0.0
        # C on the extension of x_p--origin, beyond the origin
        assert abs(XP5.cross(c)) / (XP5.norm() * c.norm()) < 1e-6
        assert XP5.dot(c) < 0.0
        # every emitted vertex is on the level set
        assert max(abs(r) for r in geo.residuals) <= 1e-8

    def test_vertex_outside_closure_types(self):
        # vertex outside the closure: the boundary splits into an Apollonius
        # arc and a second-type oval arc behind the corner
        world = CornerWedge(10 * DEG)
        x_e = from_polar(1.5, 140 * DEG)
        x_p = from_polar(2.0, 275 * DEG)
        alpha = 2.0
        assert x_p.norm() < alpha * x_e.norm()
        region = DominanceRegion(world, x_p, x_e, alpha)
        geo = boundary_arcs(region, 720)
        kinds = set(geo.arc_types())
        assert kinds == {"apollonius", "oval"}
        assert max(abs(r) for r in geo.residuals) <= 1e-8
        # boundary sits on the spliced curve: |f| small everywhere
        for p in geo.points:
            assert abs(f_value(x_p, x_e, alpha, p)) <= 1e-8

    def test_vertex_outside_oval_clipped_by_edge(self):
        world = CornerWedge(10 * DEG)
        x_e = from_polar(1.2, 60 * DEG)
        x_p = from_polar(2.0, 300 * DEG)
        region = DominanceRegion(world, x_p, x_e, 2.0)
        geo = boundary_arcs(region, 720)
        assert geo.arc_types() == ["oval", "apollonius", "oval"]
        assert max(abs(r) for r in geo.residuals) <= 1e-8

    def test_far_from_obstacle_is_single_circle(self):
        world = CornerWedge(5 * DEG)
        x_e = from_polar(40.0, math.pi)
        x_p = from_polar(41.0, math.pi - 0.02)
        region = DominanceRegion(world, x_p, x_e, 2.0)
        geo = boundary_arcs(region, 256)
        assert geo.arc_types() == ["apollonius"]


class TestBoundaryArcsPolygon:
    def test_contour_residuals(self):
        world = PolygonWorld((((1.0, -0.6), (2.2, -0.6), (2.2, 0.6), (1.0, 0.6)),))
        region = DominanceRegion(world, Point2(3.5, 0.0), Point2(0.0, 0.0), 1.6)
        geo = boundary_arcs(region, 256)
        assert geo.arcs
        assert all(t == "untyped" for t in geo.arc_types())
        assert max(abs(r) for r in geo.residuals) <= 1e-8


class TestPathContainment:
    def test_shortest_paths_stay_inside(self):
        # points of the closed region have their evader geodesics inside it
        rng = np.random.default_rng(17)
        for region in (FREE, REGION5):
            for _ in range(200):
                x = Point2(*rng.uniform(-6, 6, 2))
                if not contains_point(region.world, x):
                    continue
                if phi(region, x) < 0.0:
                    continue
                path = shortest_path(region.world, region.x_e, x)
                for t in np.linspace(0.01, 0.95, 12):
                    q = _along(path, t * path.length)
                    assert phi(region, q) > 0.0

    def test_segment_interiors_strictly_inside_each_set(self):
        # interior of [x_e, x] stays in the circle set for x on its rim, and
        # in the oval set for x on the oval rim
        rng = np.random.default_rng(19)
        for _ in range(40):
            world, x_p, x_e, alpha = random_corner_config(rng)
            circ = apollonius_of(x_p, x_e, alpha)
            for b in rng.uniform(0, 2 * math.pi, 5):
                x = Point2(circ.center.x + circ.radius * math.cos(b),
                           circ.center.y + circ.radius * math.sin(b))
                for t in (0.2, 0.5, 0.8):
                    q = Point2(x_e.x + t * (x.x - x_e.x), x_e.y + t * (x.y - x_e.y))
                    assert (q - x_p).norm() - alpha * (q - x_e).norm() > 0.0
            rho_p = x_p.norm()
            for b in rng.uniform(0, 2 * math.pi, 5):
                u = from_polar(1.0, float(b))

                def c_fn(s):
                    return math.hypot(x_e.x + s * u.x, x_e.y + s * u.y) + rho_p - alpha * s

                lo, hi = 0.0, (x_e.norm() + rho_p) / (alpha - 1.0) + 1.0
                for _ in range(120):
                    mid = 0.5 * (lo + hi)
                    if c_fn(mid) > 0:
                        lo = mid
                    else:
                        hi = mid
                x = Point2(x_e.x + lo * u.x, x_e.y + lo * u.y)
                for t in (0.2, 0.5, 0.8):
                    q = Point2(x_e.x + t * (x.x - x_e.x), x_e.y + t * (x.y - x_e.y))
                    assert q.norm() + rho_p - alpha * (q - x_e).norm() > 0.0


def _along(path, arc):
    """Point at a given arc length along a broken line."""
    left = arc
    for i in range(len(path.waypoints) - 1):
        a, b = path.waypoints[i], path.waypoints[i + 1]
        seg = (b - a).norm()
        if left <= seg or i == len(path.waypoints) - 2:
            t = 0.0 if seg == 0.0 else min(1.0, left / seg)
            return Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        left -= seg
    return path.waypoints[-1]


class TestCornerBoundaryFuzz:
    def test_random_configs_both_regimes(self):
        # residuals, chain connectivity, and world membership across random
        # wedges, speed ratios, and both vertex regimes
        rng = np.random.default_rng(123)
        n_inside = n_outside = 0
        while n_inside < 15 or n_outside < 15:
            theta0 = rng.uniform(2, 44) * DEG
            lo, hi = theta0, 2 * math.pi - theta0
            alpha = rng.uniform(1.15, 3.0)
            x_e = from_polar(rng.uniform(0.3, 4.0), rng.uniform(lo, hi))
            x_p = from_polar(rng.uniform(0.05, 6.0), rng.uniform(lo, hi))
            if (x_p - x_e).norm() < 0.05:
                continue
            region = DominanceRegion(CornerWedge(theta0), x_p, x_e, alpha)
            if x_p.norm() >= alpha * x_e.norm():
                n_inside += 1
            else:
                n_outside += 1
            geo = boundary_arcs(region, 180)
            assert geo.arcs
            assert max(abs(r) for r in geo.residuals) <= 1e-8
            for a, b in zip(geo.arcs[:-1], geo.arcs[1:]):
                assert (a.points[-1] - b.points[0]).norm() <= 1e-6
            for p in geo.points:
                assert contains_point(region.world, p)


class TestRegionValidation:
    def test_capture_radius_with_obstacles_rejected(self):
        with pytest.raises(ValueError):
            DominanceRegion(WEDGE5, XP5, XE5, 1.5, 0.1)

    def test_degenerate_separation_rejected(self):
        with pytest.raises(ValueError):
            DominanceRegion(FreePlane(), Point2(0, 0), Point2(0.05, 0), 2.0, 0.1)
