"""Desk-scale teleoperated mapping robot: simulator, services bridge,
language-driven control, and scripted scenario runs."""

from .config import RunConfig
from .geometry import DisplayBox, Pose2D, Segment2D
from .world import (
    Fiducial,
    FiducialObservation,
    LidarScan,
    RobotState,
    Simulator,
    WorldSpec,
    load_world,
    parse_world,
)

__all__ = [
    "RunConfig", "DisplayBox", "Pose2D", "Segment2D", "Fiducial",
    "FiducialObservation", "LidarScan", "RobotState", "Simulator",
    "WorldSpec", "load_world", "parse_world",
]

__version__ = "0.1.0"
