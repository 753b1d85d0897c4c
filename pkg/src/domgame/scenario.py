"""Scenario files: JSON descriptions of worlds, players, and policies.

Schema (documented in the README): a top-level object with ``world``,
``alpha``, ``pursuer``, ``evader`` and optional simulation and target keys.
Angles in files are degrees; polygon vertex lists are counterclockwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .checks import Disk, HalfPlane, PolygonTarget
from .engine import SimConfig
from .geom import CornerWedge, FreePlane, Point2, PolygonWorld, World
from .regions import DominanceRegion
from .strategies import (
    BoundaryProbePolicy,
    CornerGammaEps,
    CornerGammaStar,
    EvaderPolicy,
    FreeDeltaStar,
    GeodesicPursuit,
    HumanLivePolicy,
    PiecewiseConstantPolicy,
    PursuerStrategy,
    RetraceInterceptor,
    RunawayPursuer,
    StraightLinePolicy,
    TurningPolicy,
    WaypointsPolicy,
)


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario document."""


@dataclass
class Scenario:
    """Parsed scenario plus presentation extras the engine does not need."""

    config: SimConfig
    name: str = ""
    targets: list = field(default_factory=list)
    tick_rate: float = 50.0
    raw: dict = field(default_factory=dict)

    def region(self) -> DominanceRegion:
        c = self.config
        return DominanceRegion(c.world, c.x_p0, c.x_e0, c.alpha, c.capture_radius)


def _point(obj, key) -> Point2:
    try:
        x, y = obj
        return Point2(float(x), float(y))
    except (TypeError, ValueError) as err:
        raise ScenarioError(f"{key}: expected [x, y], got {obj!r}") from err


def parse_world(doc: dict) -> World:
    kind = doc.get("kind")
    if kind == "free":
        return FreePlane()
    if kind == "corner":
        theta0_deg = doc.get("theta0_deg")
        if theta0_deg is None:
            raise ScenarioError("corner world needs theta0_deg")
        return CornerWedge(float(theta0_deg) * math.pi / 180.0)
    if kind == "polygons":
        obstacles = doc.get("obstacles")
        if not obstacles:
            raise ScenarioError("polygons world needs a non-empty obstacles list")
        return PolygonWorld(tuple(tuple(_point(v, "obstacle vertex") for v in poly)
                                  for poly in obstacles))
    raise ScenarioError(f"unknown world kind {kind!r}")


def parse_pursuer(doc: dict) -> PursuerStrategy:
    tag = doc.get("strategy", "free-delta-star")
    if tag == "free-delta-star":
        return FreeDeltaStar()
    if tag == "corner-gamma-star":
        return CornerGammaStar()
    if tag == "corner-gamma-eps":
        return CornerGammaEps(float(doc.get("epsilon", 0.1)))
    if tag == "retrace":
        if "commit" not in doc:
            raise ScenarioError("retrace strategy needs a commit point")
        return RetraceInterceptor(_point(doc["commit"], "commit"))
    if tag == "geodesic-pursuit":
        return GeodesicPursuit()
    if tag == "runaway":
        return RunawayPursuer()
    raise ScenarioError(f"unknown pursuer strategy {tag!r}")


def parse_evader(doc: dict) -> EvaderPolicy:
    pol = doc.get("policy", {"kind": "human"})
    kind = pol.get("kind")
    if kind == "straight":
        return StraightLinePolicy(_point(pol["direction"], "direction"))
    if kind == "waypoints":
        pts = [_point(p, "waypoint") for p in pol.get("points", [])]
        if not pts:
            raise ScenarioError("waypoints policy needs points")
        return WaypointsPolicy(pts, hold_at_end=bool(pol.get("hold", True)))
    if kind == "probe":
        return BoundaryProbePolicy(_point(pol["target"], "target"))
    if kind == "piecewise":
        heads = [_point(h, "heading") for h in pol.get("headings", [])]
        if not heads:
            raise ScenarioError("piecewise policy needs headings")
        return PiecewiseConstantPolicy(heads, float(pol.get("switch_every", 0.25)))
    if kind == "turning":
        return TurningPolicy(float(pol.get("theta0", 0.0)) * math.pi / 180.0,
                             float(pol.get("omega", 1.0)))
    if kind == "human":
        return HumanLivePolicy()
    raise ScenarioError(f"unknown evader policy {kind!r}")


def parse_target(doc: dict):
    kind = doc.get("kind")
    if kind == "half-plane":
        return HalfPlane(_point(doc["normal"], "normal"), float(doc["offset"]))
    if kind == "disk":
        return Disk(_point(doc["center"], "center"), float(doc["radius"]))
    if kind == "polygon":
        return PolygonTarget(tuple(_point(v, "target vertex") for v in doc["vertices"]))
    raise ScenarioError(f"unknown target kind {kind!r}")


def parse_scenario(doc: dict, name: str = "") -> Scenario:
    try:
        world = parse_world(doc["world"])
        pursuer_doc = doc["pursuer"]
        evader_doc = doc["evader"]
        x_p0 = _point(pursuer_doc["position"], "pursuer.position")
        x_e0 = _point(evader_doc["position"], "evader.position")
        alpha = float(doc["alpha"])
    except KeyError as err:
        raise ScenarioError(f"missing required key {err}") from err
    config = SimConfig(
        world=world,
        alpha=alpha,
        x_p0=x_p0,
        x_e0=x_e0,
        pursuer=parse_pursuer(pursuer_doc),
        evader=parse_evader(evader_doc),
        capture_radius=float(doc.get("capture_radius", 0.0)),
        dt=float(doc.get("dt", 1e-3)),
        t_max=float(doc.get("t_max", 20.0)),
        eps_capture=float(doc.get("eps_capture", 1e-3)),
        input_delay_ticks=int(doc.get("input_delay_ticks", 0)),
    )
    targets = [parse_target(t) for t in doc.get("targets", [])]
    return Scenario(config=config, name=name or doc.get("name", ""),
                    targets=targets, tick_rate=float(doc.get("tick_rate", 50.0)),
                    raw=doc)


def load_scenario(path) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"scenario file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ScenarioError(f"invalid JSON in {p}: {err}") from err
    return parse_scenario(doc, name=p.stem)


def loads_scenario(text: str, name: str = "") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"invalid scenario JSON: {err}") from err
    return parse_scenario(doc, name=name)
