"""Dominance-region engine and simulator for pursuit-evasion games."""

from .engine import Captured, SimConfig, TimedOut, run
from .geom import (
    CornerWedge,
    FreePlane,
    NonDifferentiableError,
    OutsideWorldError,
    Point2,
    PolygonWorld,
    ShortestPath,
    contains_point,
    distance,
    metric_gradients,
    shortest_path,
    visible,
)
from .regions import (
    ApolloniusCircle,
    DominanceRegion,
    OvalCurve,
    apollonius_of,
    boundary_arcs,
    classify,
    eta_m,
    f_value,
    phi,
    ray_boundary_intersection,
)

__all__ = [
    "ApolloniusCircle",
    "Captured",
    "CornerWedge",
    "DominanceRegion",
    "FreePlane",
    "NonDifferentiableError",
    "OutsideWorldError",
    "OvalCurve",
    "Point2",
    "PolygonWorld",
    "ShortestPath",
    "SimConfig",
    "TimedOut",
    "apollonius_of",
    "boundary_arcs",
    "classify",
    "contains_point",
    "distance",
    "eta_m",
    "f_value",
    "metric_gradients",
    "phi",
    "ray_boundary_intersection",
    "run",
    "shortest_path",
    "visible",
]

__version__ = "0.1.0"
