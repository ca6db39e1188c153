"""Approximate subtrajectory clustering on c-packed trajectories."""

from .errors import GuardError, NoExitError, ParameterError, StructureError
from .geom import Ball, Point, Segment, Trajectory, point_at

__all__ = [
    "Ball",
    "GuardError",
    "NoExitError",
    "ParameterError",
    "Point",
    "Segment",
    "StructureError",
    "Trajectory",
    "point_at",
]
__version__ = "0.1.0"
