"""Run configuration shared by the CLI entry points.

One flat dataclass holds every tunable: simulation, mapping, navigation,
language and bridge parameters. Values are validated on construction so a
bad CLI override fails loudly with the field name.
"""

import math
from dataclasses import dataclass, fields

from .mapping import MapParams


@dataclass
class RunConfig:
    # simulation
    dt: float = 0.05                 # control tick, seconds (20 Hz)
    sensor_every: int = 5            # sensor/publication cadence, in ticks
    robot_radius: float = 0.15
    v_max: float = 0.22
    omega_max: float = 2.84
    lidar_beams: int = 360
    lidar_max_range: float = 3.5
    lidar_sigma: float = 0.0
    cam_range: float = 2.5
    cam_half_angle_deg: float = 31.0
    seed: int = 0
    # mapping
    d_break: float = 0.3
    eps_split: float = 0.03
    n_min: int = 4
    theta_merge_deg: float = 10.0
    d_merge: float = 0.08
    g_merge: float = 0.2
    theta_snap_deg: float = 3.0
    g_close: float = 0.1
    # navigation
    grid_resolution: float = 0.05
    inflation_margin: float = 0.08   # extra grid inflation beyond the radius
    goal_tol: float = 0.04
    lookahead: float = 0.25
    turn_tol_deg: float = 0.5
    goal_snap_radius: float = 0.5
    patrol_max_rings: int = 0        # 0 means unbounded
    # language
    deixis_window_s: float = 5.0
    # bridge
    retention: int = 1024

    _POSITIVE = ("dt", "robot_radius", "v_max", "omega_max", "lidar_max_range",
                 "cam_range", "cam_half_angle_deg", "d_break", "eps_split",
                 "theta_merge_deg", "d_merge", "g_merge", "theta_snap_deg",
                 "g_close", "grid_resolution", "inflation_margin", "goal_tol",
                 "lookahead", "turn_tol_deg", "goal_snap_radius",
                 "deixis_window_s")

    def __post_init__(self):
        for name in self._POSITIVE:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sensor_every < 1:
            raise ValueError("sensor_every must be at least 1")
        if self.lidar_beams < 8:
            raise ValueError("lidar_beams must be at least 8")
        if self.lidar_sigma < 0:
            raise ValueError("lidar_sigma must be non-negative")
        if self.n_min < 2:
            raise ValueError("n_min must be at least 2")
        if self.patrol_max_rings < 0:
            raise ValueError("patrol_max_rings must be non-negative")
        if self.retention < 1:
            raise ValueError("retention must be at least 1")

    def map_params(self) -> MapParams:
        return MapParams(
            d_break=self.d_break, eps_split=self.eps_split, n_min=self.n_min,
            theta_merge=math.radians(self.theta_merge_deg),
            d_merge=self.d_merge, g_merge=self.g_merge,
            theta_snap=math.radians(self.theta_snap_deg),
            g_close=self.g_close)

    @property
    def cam_half_angle(self) -> float:
        return math.radians(self.cam_half_angle_deg)

    @property
    def turn_tol(self) -> float:
        return math.radians(self.turn_tol_deg)

    @property
    def deixis_window_ticks(self) -> int:
        return max(1, int(round(self.deixis_window_s / self.dt)))


def config_field_names() -> list[str]:
    return [f.name for f in fields(RunConfig)]
