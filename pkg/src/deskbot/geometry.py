"""Planar geometry shared by the simulator, mapper, planner and console.

Two frames appear throughout the stack:

* robot/world frame ("ROS frame"): x forward, y left, meters, angles in
  radians counter-clockwise from +x;
* display frame: the console's ground plane, where a world point (a, b)
  is drawn at (x, z) = (-b, a).

All functions are pure and operate on immutable values.
"""

import math
from dataclasses import dataclass

MIN_SEGMENT_LENGTH = 1e-9


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    """Position and heading in the world frame. theta is kept in (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.theta})")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def heading(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class Segment2D:
    """A wall or map line segment in the world frame. Endpoint order carries
    no meaning; operations must treat (p1, p2) and (p2, p1) alike."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise ValueError("non-finite segment endpoint")
        if self.length() <= MIN_SEGMENT_LENGTH:
            raise ValueError(
                f"degenerate segment ({self.x1}, {self.y1})-({self.x2}, {self.y2})"
            )

    def length(self) -> float:
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)

    def p1(self) -> tuple[float, float]:
        return (self.x1, self.y1)

    def p2(self) -> tuple[float, float]:
        return (self.x2, self.y2)

    def midpoint(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    def angle(self) -> float:
        """Direction angle in radians, range (-pi, pi]."""
        return math.atan2(self.y2 - self.y1, self.x2 - self.x1)


@dataclass(frozen=True)
class DisplayBox:
    """A segment rendered as a box on the console's ground plane."""

    cx: float
    cz: float
    length: float
    yaw: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("display box needs positive length")
        if not -math.pi / 2 - 1e-12 <= self.yaw <= math.pi / 2 + 1e-12:
            raise ValueError(f"yaw {self.yaw} outside [-pi/2, pi/2]")


def ros_to_display(a: float, b: float) -> tuple[float, float]:
    """Map a world point (a, b) onto the display plane: (x, z) = (-b, a)."""
    return (-b, a)


def display_to_ros(x: float, z: float) -> tuple[float, float]:
    """Exact inverse of ros_to_display: (a, b) = (z, -x)."""
    return (z, -x)


def _sgn(v: float) -> float:
    # sgn(0) := 1 so display-vertical segments get yaw = -pi/2 deterministically
    return -1.0 if v < 0 else 1.0


def segment_to_box(seg: Segment2D) -> DisplayBox:
    """Convert a world segment into its display-plane box.

    The box sits at the midpoint of the transformed endpoints, spans their
    distance, and is yawed about the vertical axis by -asin(u.z) * sgn(u.x)
    where u is the unit direction between the transformed endpoints. The
    direction is canonicalized (u.x >= 0, breaking ties toward u.z > 0) so
    the result is invariant under endpoint swap.
    """
    q1 = ros_to_display(seg.x1, seg.y1)
    q2 = ros_to_display(seg.x2, seg.y2)
    dx, dz = q2[0] - q1[0], q2[1] - q1[1]
    length = math.hypot(dx, dz)
    if length <= MIN_SEGMENT_LENGTH:
        raise ValueError("degenerate segment")
    ux, uz = dx / length, dz / length
    if ux < 0 or (ux == 0 and uz < 0):
        ux, uz = -ux, -uz
    yaw = -math.asin(max(-1.0, min(1.0, uz))) * _sgn(ux)
    return DisplayBox(cx=(q1[0] + q2[0]) / 2.0, cz=(q1[1] + q2[1]) / 2.0,
                      length=length, yaw=yaw)


def point_segment_distance(px: float, py: float, seg: Segment2D) -> float:
    """Distance from a point to the nearest point of a segment."""
    vx, vy = seg.x2 - seg.x1, seg.y2 - seg.y1
    wx, wy = px - seg.x1, py - seg.y1
    seg_len2 = vx * vx + vy * vy
    t = (wx * vx + wy * vy) / seg_len2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (seg.x1 + t * vx), py - (seg.y1 + t * vy))


def ray_segment_intersection(ox: float, oy: float, dx: float, dy: float,
                             seg: Segment2D) -> float | None:
    """Distance along the ray (origin, unit direction) to a segment.

    Returns None when the ray misses. Parallel grazing hits are treated
    as misses.
    """
    sx, sy = seg.x2 - seg.x1, seg.y2 - seg.y1
    denom = dx * sy - dy * sx
    if abs(denom) < 1e-12:
        return None
    qx, qy = seg.x1 - ox, seg.y1 - oy
    t = (qx * sy - qy * sx) / denom          # along the ray
    u = (qx * dy - qy * dx) / denom          # along the segment
    if t >= 0.0 and 0.0 <= u <= 1.0:
        return t
    return None


def segment_segment_distance(a: Segment2D, b: Segment2D) -> float:
    """Minimum distance between two closed segments (0 when they cross)."""
    if segments_intersect(a, b):
        return 0.0
    return min(
        point_segment_distance(a.x1, a.y1, b),
        point_segment_distance(a.x2, a.y2, b),
        point_segment_distance(b.x1, b.y1, a),
        point_segment_distance(b.x2, b.y2, a),
    )


def segments_intersect(a: Segment2D, b: Segment2D) -> bool:
    """True when the two closed segments share at least one point."""
    d1x, d1y = a.x2 - a.x1, a.y2 - a.y1
    d2x, d2y = b.x2 - b.x1, b.y2 - b.y1
    qx, qy = b.x1 - a.x1, b.y1 - a.y1
    denom = d1x * d2y - d1y * d2x
    if abs(denom) < 1e-12:
        # Parallel: intersect only if collinear and overlapping.
        if abs(qx * d1y - qy * d1x) > 1e-12:
            return False
        len2 = d1x * d1x + d1y * d1y
        t0 = (qx * d1x + qy * d1y) / len2
        t1 = t0 + (d2x * d1x + d2y * d1y) / len2
        return max(min(t0, t1), 0.0) <= min(max(t0, t1), 1.0)
    t = (qx * d2y - qy * d2x) / denom
    u = (qx * d1y - qy * d1x) / denom
    return 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0
