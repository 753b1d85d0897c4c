"""Pursuer feedback maps and evader policy scripts.

Every pursuer strategy here is a function of the current state and the
evader's current input (plus, for the retrace interceptor, the evader's past
positions), so outputs through any time never depend on inputs after it: the
maps are non-anticipative by construction.

Simulator convenience: scripted evaders may emit a zero input to hold
position. The admissible class of the game contains only unit inputs, so for
a zero input the feedback maps fall back to pursuing the evader's position
directly (the degenerate-ray convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .geom import (
    ORIGIN,
    CornerWedge,
    FreePlane,
    Point2,
    World,
    contains_point,
    shortest_path,
)
from .regions import _free_ray_param, corner_ray_hit

TWO_PI = 2.0 * math.pi


class StrategyInapplicableError(RuntimeError):
    """Preconditions of the selected pursuer strategy do not hold."""


@dataclass(frozen=True)
class ControlInput:
    """A velocity-direction input; admissible inputs have unit norm."""

    direction: Point2
    admissible: bool = True


ZERO_INPUT = ControlInput(Point2(0.0, 0.0))


def _unit(v: Point2) -> Point2:
    n = math.hypot(v.x, v.y)
    return Point2(v.x / n, v.y / n)


def _is_zero(v: Point2) -> bool:
    return v.x == 0.0 and v.y == 0.0


def _pursue_direction(world: World, x_p: Point2, x_e: Point2) -> Point2:
    """First-leg direction of the pursuer's shortest path to the evader."""
    path = shortest_path(world, x_p, x_e)
    return _unit(path.waypoints[1] - x_p)


# ---------------------------------------------------------------------------
# feedback maps


def gamma_free(x_p: Point2, x_e: Point2, u_e: Point2, alpha: float, l: float = 0.0) -> ControlInput:
    """Free-plane pursuit map: head for the boundary point the evader aims at."""
    if (x_p - x_e).norm() <= l:
        raise ValueError("capture has already occurred")
    if _is_zero(u_e):
        return ControlInput(_unit(x_e - x_p))
    u = _unit(u_e)
    s = _free_ray_param(x_p, x_e, alpha, l, u)
    x_c = Point2(x_e.x + s * u.x, x_e.y + s * u.y)
    return ControlInput(_unit(x_c - x_p))


def gamma_star_corner(x_p: Point2, x_e: Point2, u_e: Point2, alpha: float) -> ControlInput:
    """Corner-world pursuit map.

    Aims at the evader's target point on the spliced boundary curve while that
    point is on the Apollonius branch; aims at the obstacle vertex while it is
    on the oval branch. The two rules agree where the branches meet (target,
    pursuer and vertex collinear), so the map is continuous.
    """
    if x_p.norm() >= alpha * x_e.norm():
        raise StrategyInapplicableError("requires the vertex outside the region closure")
    if _is_zero(u_e):
        if x_p.norm() == 0.0:
            return ControlInput(_unit(x_e - x_p))
        ta = math.atan2(x_p.y, x_p.x) % TWO_PI
        tb = math.atan2(x_e.y, x_e.x) % TWO_PI
        if abs(ta - tb) <= math.pi:
            return ControlInput(_unit(x_e - x_p))
        return ControlInput(_unit(ORIGIN - x_p))
    x_c, branch = corner_ray_hit(x_p, x_e, alpha, _unit(u_e))
    if branch == "apollonius":
        return ControlInput(_unit(x_c - x_p))
    return ControlInput(_unit(ORIGIN - x_p))


def corner_gradient_pursuer(x_p: Point2, x_e: Point2) -> Point2:
    """Gradient of the corner-world metric in the pursuer argument.

    The two-case distance formula does not involve the wedge half-angle, so
    neither does its gradient.
    """
    if (x_p - x_e).norm() <= 1e-12 or x_p.norm() <= 1e-12 or x_e.norm() <= 1e-12:
        raise ValueError("gradient undefined here")
    tp = math.atan2(x_p.y, x_p.x) % TWO_PI
    te = math.atan2(x_e.y, x_e.x) % TWO_PI
    if abs(tp - te) <= math.pi:
        return _unit(x_p - x_e)
    return _unit(x_p)


def gamma_eps_corner(x_p: Point2, x_e: Point2, u_e: Point2, alpha: float, epsilon: float) -> ControlInput:
    """Auxiliary corner map with an extra retreat-rate term.

    Output norm can reach 1 + epsilon, so it is flagged non-admissible; it
    exists to exhibit strict region nesting numerically, not to play the game.
    """
    base = gamma_star_corner(x_p, x_e, u_e, alpha)
    if epsilon == 0.0:
        return base
    g1 = corner_gradient_pursuer(x_p, x_e)
    return ControlInput(Point2(base.direction.x - epsilon * g1.x,
                               base.direction.y - epsilon * g1.y), admissible=False)


# ---------------------------------------------------------------------------
# pursuer strategy objects (per-episode state lives here)


class PursuerStrategy:
    """Feedback interface driven once per tick by the simulator."""

    def reset(self, world: World, alpha: float, capture_radius: float,
              x_p0: Point2, x_e0: Point2) -> None:
        pass

    def step(self, t: float, x_p: Point2, x_e: Point2, u_e: Point2) -> ControlInput:
        raise NotImplementedError


class FreeDeltaStar(PursuerStrategy):
    def reset(self, world, alpha, capture_radius, x_p0, x_e0):
        self.alpha = alpha
        self.l = capture_radius

    def step(self, t, x_p, x_e, u_e):
        return gamma_free(x_p, x_e, u_e, self.alpha, self.l)


class CornerGammaStar(PursuerStrategy):
    def reset(self, world, alpha, capture_radius, x_p0, x_e0):
        if not isinstance(world, CornerWedge):
            raise StrategyInapplicableError("corner strategy needs a corner world")
        self.alpha = alpha

    def step(self, t, x_p, x_e, u_e):
        return gamma_star_corner(x_p, x_e, u_e, self.alpha)


class CornerGammaEps(PursuerStrategy):
    def __init__(self, epsilon: float):
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.epsilon = epsilon

    def reset(self, world, alpha, capture_radius, x_p0, x_e0):
        if not isinstance(world, CornerWedge):
            raise StrategyInapplicableError("corner strategy needs a corner world")
        self.alpha = alpha

    def step(self, t, x_p, x_e, u_e):
        return gamma_eps_corner(x_p, x_e, u_e, self.alpha, self.epsilon)


class RunawayPursuer(PursuerStrategy):
    """Negative control: flees the evader so every monitor trips."""

    def step(self, t, x_p, x_e, u_e):
        gap = x_p - x_e
        if gap.norm() == 0.0:
            return ControlInput(Point2(1.0, 0.0))
        return ControlInput(_unit(gap))


class GeodesicPursuit(PursuerStrategy):
    """Best-effort chaser along the shortest path to the evader.

    Carries no containment guarantee; shipped as the demo opponent for worlds
    where the guaranteed maps do not apply (general polygons, or a corner
    vertex inside the region closure).
    """

    def reset(self, world, alpha, capture_radius, x_p0, x_e0):
        self.world = world

    def step(self, t, x_p, x_e, u_e):
        if (x_e - x_p).norm() <= 1e-12:
            return ZERO_INPUT
        return ControlInput(_pursue_direction(self.world, x_p, x_e))


class RetraceInterceptor(PursuerStrategy):
    """Drive to a committed boundary point, then replay the evader's path.

    The committed point is fixed when the episode starts; afterwards the
    strategy reads only the evader's recorded positions, so it stays
    non-anticipative. Once the recorded trajectory passes the committed point
    the pursuer traverses the remainder of the record at its own speed until
    the gap closes.
    """

    def __init__(self, x_star: Point2, cross_tol: float = 1e-3,
                 boundary_tol: float = 1e-6):
        self.x_star = x_star
        self.cross_tol = cross_tol
        self.boundary_tol = boundary_tol

    def reset(self, world, alpha, capture_radius, x_p0, x_e0):
        from .geom import distance

        level = (distance(world, self.x_star, x_p0)
                 - alpha * distance(world, self.x_star, x_e0) - capture_radius)
        if abs(level) > self.boundary_tol:
            raise ValueError(
                f"committed point is not on the initial boundary (level {level:+.2e})")
        self.world = world
        self.alpha = alpha
        self.history: list = []
        path = shortest_path(world, x_p0, self.x_star)
        self._legs = list(path.waypoints[1:])
        self._arrived = False
        self._cursor: Optional[int] = None

    def step(self, t, x_p, x_e, u_e):
        self.history.append(x_e)
        if not self._arrived:
            while self._legs and (self._legs[0] - x_p).norm() <= 1e-9:
                self._legs.pop(0)
            if not self._legs:
                self._arrived = True
            else:
                return ControlInput(_unit(self._legs[0] - x_p))
        if self._cursor is None:
            for k in range(len(self.history)):
                if (self.history[k] - self.x_star).norm() <= self.cross_tol:
                    self._cursor = k
                    break
            if self._cursor is None:
                return ZERO_INPUT  # hold at the committed point
        # replay: chase the recorded positions from the crossing onward
        while self._cursor < len(self.history) - 1 and (self.history[self._cursor] - x_p).norm() <= 1e-9:
            self._cursor += 1
        target = self.history[self._cursor]
        gap = target - x_p
        if gap.norm() == 0.0:
            return ZERO_INPUT
        return ControlInput(_unit(gap))


# ---------------------------------------------------------------------------
# evader policies


class EvaderPolicy:
    def reset(self, world: World, x_e0: Point2, x_p0: Point2, dt: float = 1e-3) -> None:
        pass

    def step(self, t: float, x_e: Point2, x_p: Point2) -> ControlInput:
        raise NotImplementedError


class StraightLinePolicy(EvaderPolicy):
    def __init__(self, direction: Point2):
        self.direction = _unit(direction)

    def step(self, t, x_e, x_p):
        return ControlInput(self.direction)


class WaypointsPolicy(EvaderPolicy):
    """Run the broken line through the waypoints, then hold or keep heading.

    A waypoint counts as reached within one step's travel, otherwise the
    follower chatters around it forever at tick resolution.
    """

    def __init__(self, points, hold_at_end: bool = True, switch_tol: Optional[float] = None):
        self.points = [p if isinstance(p, Point2) else Point2(*p) for p in points]
        if not self.points:
            raise ValueError("need at least one waypoint")
        self.hold_at_end = hold_at_end
        self.switch_tol = switch_tol

    def reset(self, world, x_e0, x_p0, dt: float = 1e-3):
        self._idx = 0
        self._last = ZERO_INPUT
        self._tol = self.switch_tol if self.switch_tol is not None else dt

    def step(self, t, x_e, x_p):
        while self._idx < len(self.points) and (self.points[self._idx] - x_e).norm() <= self._tol:
            self._idx += 1
        if self._idx >= len(self.points):
            if self.hold_at_end:
                return ZERO_INPUT
            return self._last
        self._last = ControlInput(_unit(self.points[self._idx] - x_e))
        return self._last


class BoundaryProbePolicy(EvaderPolicy):
    """Walk the shortest path toward a target on or beyond the boundary."""

    def __init__(self, target: Point2, hold_at_end: bool = True):
        self.target = target if isinstance(target, Point2) else Point2(*target)
        self.hold_at_end = hold_at_end

    def reset(self, world, x_e0, x_p0, dt: float = 1e-3):
        path = shortest_path(world, x_e0, self.target)
        self._inner = WaypointsPolicy(list(path.waypoints[1:]), self.hold_at_end)
        self._inner.reset(world, x_e0, x_p0, dt)

    def step(self, t, x_e, x_p):
        return self._inner.step(t, x_e, x_p)


class PiecewiseConstantPolicy(EvaderPolicy):
    """Unit heading that switches at fixed times; the random adversary."""

    def __init__(self, headings, switch_every: float):
        self.headings = [_unit(h if isinstance(h, Point2) else Point2(*h)) for h in headings]
        if not self.headings:
            raise ValueError("need at least one heading")
        self.switch_every = switch_every
        self._t0 = None

    def reset(self, world, x_e0, x_p0, dt: float = 1e-3):
        self._t0 = None

    def step(self, t, x_e, x_p):
        if self._t0 is None:
            self._t0 = t
        k = int((t - self._t0) / self.switch_every)
        return ControlInput(self.headings[min(k, len(self.headings) - 1)])


class TurningPolicy(EvaderPolicy):
    """Heading angle advancing linearly in time; a smoothly curving adversary.

    Unlike piecewise-constant scripts, play against this input is genuinely
    curved, which makes it the right probe for integrator-order checks.
    """

    def __init__(self, theta0: float, omega: float):
        self.theta0 = theta0
        self.omega = omega

    def step(self, t, x_e, x_p):
        a = self.theta0 + self.omega * t
        return ControlInput(Point2(math.cos(a), math.sin(a)))


class HumanLivePolicy(EvaderPolicy):
    """Zero-order hold of the most recent externally supplied heading."""

    def __init__(self):
        self._held = ZERO_INPUT

    @property
    def held(self) -> ControlInput:
        return self._held

    def set_heading(self, direction: Point2):
        if _is_zero(direction):
            return  # keep the previous heading; zero vectors are never sent
        self._held = ControlInput(_unit(direction))

    def step(self, t, x_e, x_p):
        return self._held


class ScriptPolicy(EvaderPolicy):
    """Replays a prerecorded per-tick input sequence (bit-exact)."""

    def __init__(self, inputs):
        self.inputs = [i if isinstance(i, Point2) else Point2(*i) for i in inputs]

    def reset(self, world, x_e0, x_p0, dt: float = 1e-3):
        self._k = 0

    def step(self, t, x_e, x_p):
        if self._k < len(self.inputs):
            d = self.inputs[self._k]
            self._k += 1
        else:
            d = self.inputs[-1] if self.inputs else Point2(0.0, 0.0)
        return ControlInput(d)


def evader_policy_step(policy: EvaderPolicy, world: World, t: float, x_e: Point2,
                       x_p: Point2, dt: float) -> tuple:
    """Policy output with wall handling: (input, slid_flag).

    A heading that would push the evader out of the region is projected onto
    the obstacle boundary tangent so the realized input stays admissible.
    """
    raw = policy.step(t, x_e, x_p)
    d = raw.direction
    if _is_zero(d) or isinstance(world, FreePlane):
        return raw, False
    probe = Point2(x_e.x + d.x * dt, x_e.y + d.y * dt)
    if contains_point(world, probe):
        return raw, False
    slid = slide_direction(world, x_e, d)
    return ControlInput(slid, admissible=raw.admissible), True


def slide_direction(world: World, pos: Point2, direction: Point2) -> Point2:
    """Project a blocked heading onto the obstacle boundary tangent."""
    if isinstance(world, CornerWedge):
        e_up = Point2(math.cos(world.theta0), math.sin(world.theta0))
        e_dn = Point2(math.cos(world.theta0), -math.sin(world.theta0))
        # nearer edge by angular distance
        t = math.atan2(pos.y, pos.x) % TWO_PI if pos.norm() > 0 else world.theta0
        edge = e_up if abs(t - world.theta0) <= abs(t - (TWO_PI - world.theta0)) else e_dn
        mag = direction.dot(edge)
        out = Point2(edge.x * mag, edge.y * mag)
        if out.norm() == 0.0:
            return Point2(0.0, 0.0)
        return _unit(out)
    if isinstance(world, FreePlane):
        return direction
    # polygon worlds: slide along the nearest obstacle edge
    best = None
    best_d = math.inf
    for poly in world.obstacles:
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            ab = b - a
            denom = ab.dot(ab)
            tt = 0.0 if denom == 0.0 else max(0.0, min(1.0, (pos - a).dot(ab) / denom))
            q = Point2(a.x + tt * ab.x, a.y + tt * ab.y)
            dd = (pos - q).norm()
            if dd < best_d:
                best_d = dd
                best = _unit(ab) if ab.norm() > 0 else None
    if best is None:
        return direction
    mag = direction.dot(best)
    if mag == 0.0:
        return Point2(0.0, 0.0)
    return _unit(Point2(best.x * mag, best.y * mag))
