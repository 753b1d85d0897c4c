"""Discrete-time simulation of the pursuit game with online monitors.

Explicit Euler stepping of the simple-motion dynamics: the pursuer moves at
speed alpha along its chosen unit direction, the evader at speed one. Steps
that would leave the playable region slide along the obstacle boundary.
Capture triggers when the shortest-path separation drops to the capture
radius (or, at zero capture radius, to a documented epsilon threshold), with
the capture instant linearly interpolated inside the final tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geom import (
    CornerWedge,
    FreePlane,
    Point2,
    PolygonWorld,
    World,
    contains_point,
    distance,
)
from .regions import DominanceRegion, phi_batch
from .strategies import (
    EvaderPolicy,
    PursuerStrategy,
    StrategyInapplicableError,
    evader_policy_step,
)


@dataclass(frozen=True)
class GameState:
    t: float
    x_p: Point2
    x_e: Point2


@dataclass
class SimConfig:
    world: World
    alpha: float
    x_p0: Point2
    x_e0: Point2
    pursuer: PursuerStrategy
    evader: EvaderPolicy
    capture_radius: float = 0.0
    dt: float = 1e-3
    t_max: float = 20.0
    eps_capture: float = 1e-3
    input_delay_ticks: int = 0

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_max < 0.0:
            raise ValueError("t_max must be non-negative")
        if not isinstance(self.world, FreePlane) and self.capture_radius != 0.0:
            raise ValueError("capture radius must be zero with obstacles")
        if distance(self.world, self.x_p0, self.x_e0) <= self.capture_threshold:
            raise ValueError("players start within capture range")

    @property
    def capture_threshold(self) -> float:
        return self.capture_radius if self.capture_radius > 0.0 else self.eps_capture

    def capture_bound(self) -> float:
        """Analytic capture-time bound for the guaranteed strategies."""
        d0 = distance(self.world, self.x_p0, self.x_e0)
        return (d0 - self.capture_radius) / (self.alpha - 1.0)


@dataclass
class Trajectory:
    """Column-stored tick records; one row per tick plus the initial state."""

    t: list = field(default_factory=list)
    xp_x: list = field(default_factory=list)
    xp_y: list = field(default_factory=list)
    xe_x: list = field(default_factory=list)
    xe_y: list = field(default_factory=list)
    up_x: list = field(default_factory=list)
    up_y: list = field(default_factory=list)
    ue_x: list = field(default_factory=list)
    ue_y: list = field(default_factory=list)
    separation: list = field(default_factory=list)
    slide_p: list = field(default_factory=list)
    slide_e: list = field(default_factory=list)

    def append(self, t, xp, xe, up, ue, sep, slide_p, slide_e):
        self.t.append(t)
        self.xp_x.append(xp.x)
        self.xp_y.append(xp.y)
        self.xe_x.append(xe.x)
        self.xe_y.append(xe.y)
        self.up_x.append(up.x)
        self.up_y.append(up.y)
        self.ue_x.append(ue.x)
        self.ue_y.append(ue.y)
        self.separation.append(sep)
        self.slide_p.append(slide_p)
        self.slide_e.append(slide_e)

    def __len__(self):
        return len(self.t)

    def evader_points(self) -> np.ndarray:
        return np.column_stack([self.xe_x, self.xe_y])

    def pursuer_points(self) -> np.ndarray:
        return np.column_stack([self.xp_x, self.xp_y])

    COLUMNS = ("t", "xp_x", "xp_y", "xe_x", "xe_y", "up_x", "up_y",
               "ue_x", "ue_y", "separation", "slide_p", "slide_e")

    def rows(self):
        for k in range(len(self.t)):
            yield (self.t[k], self.xp_x[k], self.xp_y[k], self.xe_x[k], self.xe_y[k],
                   self.up_x[k], self.up_y[k], self.ue_x[k], self.ue_y[k],
                   self.separation[k], self.slide_p[k], self.slide_e[k])

    def write_tsv(self, path):
        with open(path, "w") as fh:
            fh.write("\t".join(self.COLUMNS) + "\n")
            for row in self.rows():
                fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return format(float(v), ".17g")


@dataclass(frozen=True)
class Captured:
    t_f: float


@dataclass(frozen=True)
class TimedOut:
    t_end: float


@dataclass(frozen=True)
class MonitorViolation:
    which: str
    t: float
    magnitude: float


SimOutcome = object  # Captured | TimedOut | MonitorViolation


# ---------------------------------------------------------------------------
# stepping


def _move_point(world: World, pos: Point2, vel: Point2, dt: float):
    """Euler step with boundary sliding; returns (new position, slid flag)."""
    target = Point2(pos.x + vel.x * dt, pos.y + vel.y * dt)
    if contains_point(world, target):
        return target, False
    if isinstance(world, CornerWedge):
        new = _slide_wedge(world, pos, target)
    else:
        new = _slide_polygon(world, pos, target)
    return new, True


def _slide_wedge(world: CornerWedge, pos: Point2, target: Point2) -> Point2:
    th0 = world.theta0
    edges = (Point2(math.cos(th0), math.sin(th0)), Point2(math.cos(th0), -math.sin(th0)))
    move = target - pos
    best_s = None
    best_e = None
    for e in edges:
        denom = move.cross(e)
        if abs(denom) < 1e-18:
            continue
        s = e.cross(pos) / denom
        t = move.cross(pos) / denom
        if -1e-12 <= s <= 1.0 and t >= -1e-12:
            if best_s is None or s < best_s:
                best_s = s
                best_e = e
    if best_s is None:
        # started outside or tangent: clamp to the nearest edge ray
        return _project_wedge(world, target)
    hit = Point2(pos.x + best_s * move.x, pos.y + best_s * move.y)
    rest = Point2((1.0 - best_s) * move.x, (1.0 - best_s) * move.y)
    along = rest.dot(best_e)
    rho_hit = hit.dot(best_e)
    if rho_hit + along < 0.0:
        along = -rho_hit  # sliding stops at the vertex
    out = Point2(best_e.x * (rho_hit + along), best_e.y * (rho_hit + along))
    if not contains_point(world, out):
        return _project_wedge(world, out)
    return out


def _project_wedge(world: CornerWedge, p: Point2) -> Point2:
    th0 = world.theta0
    best = None
    best_d = math.inf
    for e in (Point2(math.cos(th0), math.sin(th0)), Point2(math.cos(th0), -math.sin(th0))):
        t = max(0.0, p.dot(e))
        q = Point2(e.x * t, e.y * t)
        d = (p - q).norm()
        if d < best_d:
            best_d = d
            best = q
    return best


def _slide_polygon(world: PolygonWorld, pos: Point2, target: Point2) -> Point2:
    move = target - pos
    best = None  # (s, edge a, edge b)
    for poly in world.obstacles:
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            e = b - a
            denom = move.cross(e)
            if abs(denom) < 1e-18:
                continue
            w = a - pos
            s = w.cross(e) / denom
            u = w.cross(move) / denom
            if -1e-12 <= s <= 1.0 and -1e-9 <= u <= 1.0 + 1e-9:
                if best is None or s < best[0]:
                    best = (s, a, b)
    if best is None:
        return _project_polygon(world, target)
    s, a, b = best
    hit = Point2(pos.x + s * move.x, pos.y + s * move.y)
    rest = Point2((1.0 - s) * move.x, (1.0 - s) * move.y)
    e = (b - a).unit()
    along = rest.dot(e)
    out = Point2(hit.x + e.x * along, hit.y + e.y * along)
    # clamp to the edge segment so we do not slide through a vertex
    t_out = (out - a).dot(e)
    t_max = (b - a).norm()
    t_clamped = max(0.0, min(t_max, t_out))
    out = Point2(a.x + e.x * t_clamped, a.y + e.y * t_clamped)
    if not contains_point(world, out):
        return _project_polygon(world, out)
    return out


def _project_polygon(world: PolygonWorld, p: Point2) -> Point2:
    best = p
    best_d = math.inf
    for poly in world.obstacles:
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            ab = b - a
            denom = ab.dot(ab)
            t = 0.0 if denom == 0.0 else max(0.0, min(1.0, (p - a).dot(ab) / denom))
            q = Point2(a.x + t * ab.x, a.y + t * ab.y)
            d = (p - q).norm()
            if d < best_d:
                best_d = d
                best = q
    return best


def _step_with_flags(state: GameState, u_p: Point2, u_e: Point2, dt: float,
                     world: World, alpha: float):
    new_p, slide_p = _move_point(world, state.x_p, Point2(alpha * u_p.x, alpha * u_p.y), dt)
    new_e, slide_e = _move_point(world, state.x_e, u_e, dt)
    return GameState(state.t + dt, new_p, new_e), slide_p, slide_e


def step(state: GameState, u_p: Point2, u_e: Point2, dt: float, world: World,
         alpha: float) -> GameState:
    """One Euler tick; players are projected to stay inside the region."""
    return _step_with_flags(state, u_p, u_e, dt, world, alpha)[0]


# ---------------------------------------------------------------------------
# episode driver


class EpisodeRunner:
    """Incremental episode execution; one tick per call.

    Live sessions and batch runs drive the same loop body, which is what
    makes replay from recorded inputs reproduce a session bit for bit.
    """

    def __init__(self, config: SimConfig):
        self.config = config
        self.world = config.world
        self.alpha = config.alpha
        self.dt = config.dt
        self.threshold = config.capture_threshold
        config.evader.reset(self.world, config.x_e0, config.x_p0)
        config.pursuer.reset(self.world, self.alpha, config.capture_radius,
                             config.x_p0, config.x_e0)
        self.state = GameState(0.0, config.x_p0, config.x_e0)
        self.sep = distance(self.world, self.state.x_p, self.state.x_e)
        self.traj = Trajectory()
        zero = Point2(0.0, 0.0)
        self.traj.append(0.0, self.state.x_p, self.state.x_e, zero, zero, self.sep,
                         False, False)
        self._delay = max(0, int(config.input_delay_ticks))
        self._recent: list = []
        self.max_ticks = int(math.ceil(config.t_max / self.dt - 1e-12))
        self.ticks_done = 0
        self.outcome = None

    def tick(self):
        """Advance one step; returns the outcome once the episode ends."""
        if self.outcome is not None:
            return self.outcome
        if self.ticks_done >= self.max_ticks:
            self.outcome = TimedOut(self.state.t)
            return self.outcome
        cfg = self.config
        t = self.state.t
        u_e_input, slide_hint = evader_policy_step(cfg.evader, self.world, t,
                                                   self.state.x_e, self.state.x_p, self.dt)
        u_e = u_e_input.direction
        if self._delay > 0:
            self._recent.append(u_e)
            seen = (self._recent[-self._delay - 1]
                    if len(self._recent) > self._delay else Point2(0.0, 0.0))
        else:
            seen = u_e
        try:
            u_p = cfg.pursuer.step(t, self.state.x_p, self.state.x_e, seen).direction
        except StrategyInapplicableError as err:
            self.outcome = MonitorViolation(f"strategy_inapplicable: {err}", t, math.nan)
            return self.outcome
        prev = self.state
        prev_sep = self.sep
        self.state, slide_p, slide_e = _step_with_flags(self.state, u_p, u_e, self.dt,
                                                        self.world, self.alpha)
        self.sep = distance(self.world, self.state.x_p, self.state.x_e)
        self.traj.append(self.state.t, self.state.x_p, self.state.x_e, u_p, u_e,
                         self.sep, slide_p, slide_e or slide_hint)
        self.ticks_done += 1
        s_hit = self._swept_capture(prev, prev_sep)
        if s_hit is not None:
            self.outcome = Captured(prev.t + s_hit * self.dt)
            return self.outcome
        if self.ticks_done >= self.max_ticks:
            self.outcome = TimedOut(self.state.t)
            return self.outcome
        return None

    def _swept_capture(self, prev: GameState, prev_sep: float):
        """Earliest sub-tick fraction at which the players came within range.

        Both players move linearly inside a tick, so their distance is a
        square-root-of-quadratic; the first crossing of the threshold (if
        any) is solved exactly. A fast pursuer can pass through capture range
        and exit within one tick, which endpoint checks alone would miss.
        In obstacle worlds the check is gated on mutual visibility so capture
        never triggers through a wall.
        """
        thr = self.threshold
        if not isinstance(self.world, FreePlane):
            from .geom import visible

            if not (visible(self.world, prev.x_p, prev.x_e)
                    and visible(self.world, self.state.x_p, self.state.x_e)):
                return 1.0 if self.sep <= thr else None
        rx = prev.x_e.x - prev.x_p.x
        ry = prev.x_e.y - prev.x_p.y
        vx = (self.state.x_e.x - prev.x_e.x) - (self.state.x_p.x - prev.x_p.x)
        vy = (self.state.x_e.y - prev.x_e.y) - (self.state.x_p.y - prev.x_p.y)
        c = rx * rx + ry * ry - thr * thr
        if c <= 0.0:
            return 0.0
        a = vx * vx + vy * vy
        b = 2.0 * (rx * vx + ry * vy)
        if a == 0.0:
            return None
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return None
        root = math.sqrt(disc)
        s = (-b - root) / (2.0 * a)
        if 0.0 <= s <= 1.0:
            return s
        return None


def run(config: SimConfig):
    """Run an episode to capture or timeout; returns (Trajectory, outcome)."""
    runner = EpisodeRunner(config)
    if runner.max_ticks == 0:
        return runner.traj, TimedOut(runner.state.t)
    while True:
        outcome = runner.tick()
        if outcome is not None:
            return runner.traj, outcome


# ---------------------------------------------------------------------------
# monitors


@dataclass(frozen=True)
class MonitorReport:
    name: str
    passed: bool
    worst: float
    tolerance: float
    worst_t: float

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"{self.name}: {status} (worst {self.worst:+.3e}, tol {self.tolerance:.3e}, t {self.worst_t:.4f})"


def monitor_containment(traj: Trajectory, initial_region: DominanceRegion,
                        tol: Optional[float] = None, dt: Optional[float] = None) -> MonitorReport:
    """Worst excursion of the evader outside its initial region.

    Violation is measured as -phi_0 at recorded evader positions; the default
    tolerance 10 (alpha + 1) dt covers the discretization drift.
    """
    if dt is None:
        dt = traj.t[1] - traj.t[0] if len(traj) > 1 else 1e-3
    if tol is None:
        tol = 10.0 * (initial_region.alpha + 1.0) * dt
    values = phi_batch(initial_region, traj.evader_points())
    viol = -values
    k = int(np.nanargmax(viol))
    worst = float(viol[k])
    return MonitorReport("containment", worst <= tol, worst, tol, traj.t[k])


def monitor_closing_rate(traj: Trajectory, alpha: float, base_tol: float = 1e-2,
                         world: Optional[World] = None) -> MonitorReport:
    """Per-tick closing-rate check against the guaranteed bound.

    Two state-dependent terms keep the discrete check honest about effects
    that vanish with dt: the chord rate may exceed the instantaneous bound by
    up to dt (1+alpha)^2 / (2 d) when the players are close, and a step that
    carries a player across an obstacle vertex overshoots the path bend,
    raising the geodesic separation by up to twice the overshoot for that one
    tick. Both corrections are O(dt) in integrated effect.
    """
    if len(traj) < 2:
        return MonitorReport("closing_rate", True, -math.inf, base_tol, 0.0)
    t = np.asarray(traj.t)
    d = np.asarray(traj.separation)
    dts = np.diff(t)
    rates = np.diff(d) / dts
    allowance = (1.0 - alpha) + base_tol + dts * (1.0 + alpha) ** 2 / (2.0 * np.maximum(d[:-1], 1e-12))
    if world is not None:
        verts = _world_vertices(world)
        if verts:
            vp = _min_vertex_dist(traj.pursuer_points(), verts)
            ve = _min_vertex_dist(traj.evader_points(), verts)
            near_p = np.minimum(vp[:-1], vp[1:]) <= 1.5 * alpha * dts
            near_e = np.minimum(ve[:-1], ve[1:]) <= 1.5 * dts
            allowance = allowance + 2.0 * (alpha + 1.0) * (near_p | near_e)
    excess = rates - allowance
    k = int(np.argmax(excess))
    worst = float(excess[k])
    return MonitorReport("closing_rate", worst <= 0.0, worst, 0.0, float(t[k]))


def _world_vertices(world: World):
    if isinstance(world, CornerWedge):
        return [Point2(0.0, 0.0)]
    if isinstance(world, PolygonWorld):
        return list(world.vertices())
    return []


def _min_vertex_dist(pts: np.ndarray, verts) -> np.ndarray:
    best = np.full(len(pts), np.inf)
    for v in verts:
        best = np.minimum(best, np.hypot(pts[:, 0] - v.x, pts[:, 1] - v.y))
    return best


def players_stay_inside(traj: Trajectory, world: World) -> bool:
    from .geom import contains_batch

    return bool(contains_batch(world, traj.evader_points()).all()
                and contains_batch(world, traj.pursuer_points()).all())
