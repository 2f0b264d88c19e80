"""Ground-truth world and simulated differential-drive robot.

The world is a set of wall segments plus uniquely-numbered fiducial markers
inside an axis-aligned boundary. The robot is a disc with unicycle
kinematics, a 360-degree raycast rangefinder, and a forward-facing camera
that reports each fiducial the first time it is seen.
"""

import math
import random
from dataclasses import dataclass, replace

from .geometry import (
    Pose2D,
    Segment2D,
    normalize_angle,
    point_segment_distance,
    ray_segment_intersection,
    segment_segment_distance,
    segments_intersect,
)

NO_RETURN = math.inf


@dataclass(frozen=True)
class Fiducial:
    id: int
    pose: Pose2D


@dataclass(frozen=True)
class FiducialObservation:
    id: int
    pose: Pose2D


@dataclass(frozen=True)
class WorldSpec:
    """Static ground truth: bounds (xmin, ymin, xmax, ymax), walls,
    fiducials and the robot's start pose."""

    bounds: tuple[float, float, float, float]
    walls: tuple[Segment2D, ...]
    fiducials: tuple[Fiducial, ...]
    robot_start: Pose2D

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"empty bounds {self.bounds}")
        ids = [f.id for f in self.fiducials]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate fiducial ids")
        if any(i < 0 for i in ids):
            raise ValueError("fiducial ids must be non-negative")
        if not self.contains(self.robot_start.x, self.robot_start.y):
            raise ValueError("robot start outside bounds")

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D
    v: float = 0.0
    omega: float = 0.0
    seen_fiducials: frozenset[int] = frozenset()
    collided: bool = False


@dataclass(frozen=True)
class LidarScan:
    """Per-beam ranges; beam i points at i * (2*pi / len(ranges)) radians
    counter-clockwise from the robot heading. NO_RETURN marks beams that
    saw nothing within max_range."""

    ranges: tuple[float, ...]
    max_range: float
    timestamp: int = 0


def clear_of_walls(world: WorldSpec, x: float, y: float, radius: float) -> bool:
    """True when a robot disc at (x, y) touches no wall."""
    return all(point_segment_distance(x, y, w) >= radius for w in world.walls)


def _sweep_clear(world: WorldSpec, x0: float, y0: float, x1: float, y1: float,
                 radius: float) -> bool:
    """True when the disc can translate from (x0, y0) to (x1, y1) without
    touching a wall (swept capsule test)."""
    if math.hypot(x1 - x0, y1 - y0) < 1e-8:
        return clear_of_walls(world, x1, y1, radius)
    path = Segment2D(x0, y0, x1, y1)
    return all(segment_segment_distance(path, w) >= radius for w in world.walls)


def _advance(pose: Pose2D, v: float, omega: float, dt: float) -> Pose2D:
    return Pose2D(
        pose.x + v * math.cos(pose.theta) * dt,
        pose.y + v * math.sin(pose.theta) * dt,
        normalize_angle(pose.theta + omega * dt),
    )


def step(world: WorldSpec, state: RobotState, commanded: tuple[float, float],
         dt: float, v_max: float = 0.22, omega_max: float = 2.84,
         robot_radius: float = 0.15) -> RobotState:
    """Advance the robot one control step with Euler unicycle integration.

    Translation stops at wall contact (no sliding): if the full step would
    push the disc into a wall, the travel fraction is bisected down to the
    contact point, forward velocity is zeroed and the collision flag set.
    Rotation is always applied in full; a disc cannot collide by spinning.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = max(-v_max, min(v_max, commanded[0]))
    omega = max(-omega_max, min(omega_max, commanded[1]))

    pose = state.pose
    candidate = _advance(pose, v, omega, dt)
    if _sweep_clear(world, pose.x, pose.y, candidate.x, candidate.y,
                    robot_radius):
        return replace(state, pose=candidate, v=v, omega=omega, collided=False)

    # Bisect the travel fraction down to wall contact; rotation completes.
    lo, hi = 0.0, 1.0
    for _ in range(48):
        mid = (lo + hi) / 2.0
        p = _advance(pose, v * mid, omega, dt)
        if _sweep_clear(world, pose.x, pose.y, p.x, p.y, robot_radius):
            lo = mid
        else:
            hi = mid
    contact = _advance(pose, v * lo, omega, dt)
    if not clear_of_walls(world, contact.x, contact.y, robot_radius):
        contact = Pose2D(pose.x, pose.y, contact.theta)
    return replace(state, pose=contact, v=0.0, omega=omega, collided=True)


def scan(world: WorldSpec, pose: Pose2D, beams: int = 360,
         max_range: float = 3.5, sigma: float = 0.0,
         rng: random.Random | None = None, timestamp: int = 0) -> LidarScan:
    """Raycast one full revolution from the robot pose.

    Beam i fires at pose.theta + i * 2*pi/beams; its range is the nearest
    wall hit, or NO_RETURN past max_range. With sigma > 0, Gaussian noise
    is added to real returns and clamped into (0, max_range].
    """
    ranges = []
    step_angle = 2.0 * math.pi / beams
    for i in range(beams):
        ang = pose.theta + i * step_angle
        dx, dy = math.cos(ang), math.sin(ang)
        best = NO_RETURN
        for wall in world.walls:
            d = ray_segment_intersection(pose.x, pose.y, dx, dy, wall)
            if d is not None and d < best:
                best = d
        if best > max_range:
            best = NO_RETURN
        elif sigma > 0.0 and rng is not None:
            best = min(max_range, max(1e-9, best + rng.gauss(0.0, sigma)))
        ranges.append(best)
    return LidarScan(ranges=tuple(ranges), max_range=max_range, timestamp=timestamp)


def detect_fiducials(world: WorldSpec, pose: Pose2D, seen: frozenset[int],
                     cam_range: float = 2.5,
                     cam_half_angle: float = math.radians(31.0),
                     ) -> tuple[list[FiducialObservation], frozenset[int]]:
    """Report fiducials newly visible from the pose.

    Visible means: within camera range, within the half-angle cone around
    the heading, line of sight not crossing any wall, and not reported
    before. Returns the observations plus the grown seen-set.
    """
    found = []
    new_seen = set(seen)
    for fid in world.fiducials:
        if fid.id in seen:
            continue
        dx, dy = fid.pose.x - pose.x, fid.pose.y - pose.y
        dist = math.hypot(dx, dy)
        if dist > cam_range:
            continue
        if abs(normalize_angle(math.atan2(dy, dx) - pose.theta)) > cam_half_angle:
            continue
        if dist > 1e-9:
            ray = Segment2D(pose.x, pose.y, fid.pose.x, fid.pose.y)
            if any(segments_intersect(ray, w) for w in world.walls):
                continue
        found.append(FiducialObservation(id=fid.id, pose=fid.pose))
        new_seen.add(fid.id)
    return found, frozenset(new_seen)


class Simulator:
    """Owns the robot state and advances it on the controller's tick."""

    def __init__(self, world: WorldSpec, dt: float = 0.05,
                 v_max: float = 0.22, omega_max: float = 2.84,
                 robot_radius: float = 0.15, lidar_beams: int = 360,
                 lidar_max_range: float = 3.5, lidar_sigma: float = 0.0,
                 cam_range: float = 2.5,
                 cam_half_angle: float = math.radians(31.0), seed: int = 0):
        if not clear_of_walls(world, world.robot_start.x, world.robot_start.y,
                              robot_radius):
            raise ValueError("robot start pose intersects a wall")
        self.world = world
        self.dt = dt
        self.v_max = v_max
        self.omega_max = omega_max
        self.robot_radius = robot_radius
        self.lidar_beams = lidar_beams
        self.lidar_max_range = lidar_max_range
        self.lidar_sigma = lidar_sigma
        self.cam_range = cam_range
        self.cam_half_angle = cam_half_angle
        self.rng = random.Random(seed)
        self.state = RobotState(pose=world.robot_start)
        self._command = (0.0, 0.0)

    def set_command(self, v: float, omega: float) -> None:
        self._command = (v, omega)

    def step(self) -> bool:
        """Advance one tick; returns True if the step hit a wall."""
        self.state = step(self.world, self.state, self._command, self.dt,
                          self.v_max, self.omega_max, self.robot_radius)
        return self.state.collided

    def lidar(self, timestamp: int = 0) -> LidarScan:
        return scan(self.world, self.state.pose, self.lidar_beams,
                    self.lidar_max_range, self.lidar_sigma, self.rng, timestamp)

    def fiducial_sweep(self) -> list[FiducialObservation]:
        found, seen = detect_fiducials(self.world, self.state.pose,
                                       self.state.seen_fiducials,
                                       self.cam_range, self.cam_half_angle)
        if found:
            self.state = replace(self.state, seen_fiducials=seen)
        return found


class WorldFileError(ValueError):
    """World file rejected; str() carries the line number and reason."""


def parse_world(text: str, source: str = "<string>") -> WorldSpec:
    """Parse the plain-text world format.

    Directives, one per line ('#' starts a comment):
        bounds XMIN YMIN XMAX YMAX
        start X Y THETA
        wall X1 Y1 X2 Y2
        fiducial ID X Y THETA
    """
    bounds = None
    start = None
    walls: list[Segment2D] = []
    fiducials: list[Fiducial] = []

    def fail(lineno, msg):
        raise WorldFileError(f"{source}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0].lower(), parts[1:]
        try:
            if kind == "bounds":
                if len(args) != 4:
                    fail(lineno, "bounds needs 4 numbers")
                bounds = tuple(float(a) for a in args)
            elif kind == "start":
                if len(args) != 3:
                    fail(lineno, "start needs X Y THETA")
                start = Pose2D(*(float(a) for a in args))
            elif kind == "wall":
                if len(args) != 4:
                    fail(lineno, "wall needs X1 Y1 X2 Y2")
                walls.append(Segment2D(*(float(a) for a in args)))
            elif kind == "fiducial":
                if len(args) != 4:
                    fail(lineno, "fiducial needs ID X Y THETA")
                fiducials.append(Fiducial(int(args[0]),
                                          Pose2D(*(float(a) for a in args[1:]))))
            else:
                fail(lineno, f"unknown directive {kind!r}")
        except WorldFileError:
            raise
        except ValueError as exc:
            fail(lineno, str(exc))
    if bounds is None:
        raise WorldFileError(f"{source}: missing 'bounds' line")
    if start is None:
        raise WorldFileError(f"{source}: missing 'start' line")
    try:
        return WorldSpec(bounds=bounds, walls=tuple(walls),
                         fiducials=tuple(fiducials), robot_start=start)
    except ValueError as exc:
        raise WorldFileError(f"{source}: {exc}") from exc


def load_world(path: str) -> WorldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_world(fh.read(), source=path)


def square_room(side: float = 4.0, start: Pose2D = Pose2D(0, 0, 0),
                fiducials: tuple[Fiducial, ...] = ()) -> WorldSpec:
    """A side x side room centered on the origin; handy for tests."""
    h = side / 2.0
    walls = (
        Segment2D(-h, -h, h, -h),
        Segment2D(h, -h, h, h),
        Segment2D(h, h, -h, h),
        Segment2D(-h, h, -h, -h),
    )
    margin = side / 4.0
    return WorldSpec(bounds=(-h - margin, -h - margin, h + margin, h + margin),
                     walls=walls, fiducials=fiducials, robot_start=start)
