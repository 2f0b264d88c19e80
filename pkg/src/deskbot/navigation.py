"""Motion planning over the perceived map.

The perceived segments are rasterized into an occupancy grid inflated by
the robot radius, goals are planned with 8-connected A*, and paths are
tracked with a lookahead waypoint follower. Patrol goals are generated as
concentric polygon rings around the patrol origin.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2D, normalize_angle, point_segment_distance
from .mapping import PerceivedMap

FREE = 0
OCCUPIED = 1
UNKNOWN = 2  # reserved for frontier-style extensions

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class OccupancyGrid:
    resolution: float
    origin: tuple[float, float]     # world coords of the (0, 0) cell corner
    cells: np.ndarray               # shape (nx, ny), values FREE/OCCUPIED/UNKNOWN

    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.origin[0]) / self.resolution)),
                int(math.floor((y - self.origin[1]) / self.resolution)))

    def center_of(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin[0] + (ix + 0.5) * self.resolution,
                self.origin[1] + (iy + 0.5) * self.resolution)

    def in_bounds(self, ix: int, iy: int) -> bool:
        nx, ny = self.cells.shape
        return 0 <= ix < nx and 0 <= iy < ny

    def is_free(self, ix: int, iy: int) -> bool:
        return self.in_bounds(ix, iy) and self.cells[ix, iy] == FREE


def rasterize(pmap: PerceivedMap, radius: float,
              bounds: tuple[float, float, float, float],
              resolution: float = 0.05) -> OccupancyGrid:
    """Mark every cell whose center lies within radius of a map segment."""
    xmin, ymin, xmax, ymax = bounds
    nx = max(1, int(math.ceil((xmax - xmin) / resolution)))
    ny = max(1, int(math.ceil((ymax - ymin) / resolution)))
    cells = np.full((nx, ny), FREE, dtype=np.uint8)
    grid = OccupancyGrid(resolution=resolution, origin=(xmin, ymin), cells=cells)
    for seg in pmap.segments:
        lo_x = min(seg.x1, seg.x2) - radius
        hi_x = max(seg.x1, seg.x2) + radius
        lo_y = min(seg.y1, seg.y2) - radius
        hi_y = max(seg.y1, seg.y2) + radius
        i0 = max(0, int(math.floor((lo_x - xmin) / resolution)))
        i1 = min(nx - 1, int(math.floor((hi_x - xmin) / resolution)))
        j0 = max(0, int(math.floor((lo_y - ymin) / resolution)))
        j1 = min(ny - 1, int(math.floor((hi_y - ymin) / resolution)))
        for ix in range(i0, i1 + 1):
            for iy in range(j0, j1 + 1):
                cx, cy = grid.center_of(ix, iy)
                if point_segment_distance(cx, cy, seg) <= radius:
                    cells[ix, iy] = OCCUPIED
    return grid


_NEIGHBORS = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
              (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2))


def plan(grid: OccupancyGrid, start: tuple[float, float],
         goal: tuple[float, float]) -> list[tuple[float, float]] | None:
    """Shortest 8-connected A* path between the start and goal cells.

    Ties on f break toward the smaller heuristic, then insertion order, so
    the result is deterministic. Diagonal moves are disallowed when both
    adjacent orthogonal cells are blocked, so a path can never cut the
    corner of an obstacle. Returns cell-center waypoints (first is the
    start cell's center, last the goal cell's), or None when the goal is
    occupied or unreachable.
    """
    s = grid.cell_of(*start)
    g = grid.cell_of(*goal)
    if not grid.is_free(*s):
        raise ValueError(f"start cell {s} is not free")
    if not grid.is_free(*g):
        return None
    if s == g:
        return [grid.center_of(*s)]

    def h(c):
        return math.hypot(c[0] - g[0], c[1] - g[1])

    counter = 0
    open_heap = [(h(s), h(s), counter, s)]
    g_cost = {s: 0.0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    closed = set()
    while open_heap:
        _, _, _, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        if cur == g:
            cells = [cur]
            while cells[-1] != s:
                cells.append(came[cells[-1]])
            cells.reverse()
            return [grid.center_of(*c) for c in cells]
        closed.add(cur)
        for dx, dy, cost in _NEIGHBORS:
            nxt = (cur[0] + dx, cur[1] + dy)
            if not grid.is_free(*nxt) or nxt in closed:
                continue
            if dx != 0 and dy != 0:
                if not (grid.is_free(cur[0] + dx, cur[1])
                        or grid.is_free(cur[0], cur[1] + dy)):
                    continue
            new_cost = g_cost[cur] + cost
            if new_cost < g_cost.get(nxt, math.inf) - 1e-12:
                g_cost[nxt] = new_cost
                came[nxt] = cur
                counter += 1
                hn = h(nxt)
                heapq.heappush(open_heap, (new_cost + hn, hn, counter, nxt))
    return None


def path_cost(path: list[tuple[float, float]], resolution: float) -> float:
    """Grid-step cost of a cell-center path, in cell units."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += math.hypot(b[0] - a[0], b[1] - a[1]) / resolution
    return total


def nearest_free(grid: OccupancyGrid, point: tuple[float, float],
                 max_dist: float) -> tuple[float, float] | None:
    """Center of the free cell closest to the point, within max_dist.
    The point's own cell wins outright when free."""
    cx, cy = grid.cell_of(*point)
    if grid.is_free(cx, cy):
        return grid.center_of(cx, cy)
    reach = int(math.ceil(max_dist / grid.resolution)) + 1
    best = None
    best_key = None
    for ix in range(cx - reach, cx + reach + 1):
        for iy in range(cy - reach, cy + reach + 1):
            if not grid.is_free(ix, iy):
                continue
            wx, wy = grid.center_of(ix, iy)
            d = math.hypot(wx - point[0], wy - point[1])
            if d > max_dist:
                continue
            key = (d, ix, iy)
            if best_key is None or key < best_key:
                best_key = key
                best = (wx, wy)
    return best


def path_blocked(grid: OccupancyGrid, path: list[tuple[float, float]],
                 from_index: int = 0) -> bool:
    """True when any remaining waypoint now sits in a non-free cell."""
    for x, y in path[from_index:]:
        if not grid.is_free(*grid.cell_of(x, y)):
            return True
    return False


@dataclass(frozen=True)
class FollowResult:
    v: float
    omega: float
    index: int
    reached: bool


def follow(path: list[tuple[float, float]], pose: Pose2D, index: int,
           goal_tol: float = 0.04, lookahead: float = 0.25,
           v_max: float = 0.22, omega_max: float = 2.84,
           k_omega: float = 4.0, k_v: float = 1.5,
           rejoin_dist: float = 0.15) -> FollowResult:
    """One waypoint-tracking control step.

    Advances to the waypoint nearest the robot (monotonically along the
    path), then steers toward the first waypoint at least lookahead ahead,
    or the final one. A robot displaced more than rejoin_dist from the
    path heads straight back to its nearest waypoint instead of cutting
    across to a far one. index is the follower's progress and must be fed
    back on the next call.
    """
    if not path:
        raise ValueError("empty path")
    final = path[-1]
    dist_final = math.hypot(final[0] - pose.x, final[1] - pose.y)
    if dist_final <= goal_tol:
        return FollowResult(0.0, 0.0, len(path) - 1, True)

    i = min(index, len(path) - 1)
    best_i = i
    best_d = math.hypot(path[i][0] - pose.x, path[i][1] - pose.y)
    j = i
    while j < len(path) - 1:
        j += 1
        d = math.hypot(path[j][0] - pose.x, path[j][1] - pose.y)
        if d < best_d:
            best_d, best_i = d, j
        elif d > best_d + lookahead:
            break
    i = best_i
    if best_d > rejoin_dist:
        target = path[i]  # rejoin the path before chasing lookahead targets
    else:
        while i < len(path) - 1 and math.hypot(path[i][0] - pose.x,
                                               path[i][1] - pose.y) < lookahead:
            i += 1
        target = path[i]

    err = normalize_angle(math.atan2(target[1] - pose.y, target[0] - pose.x)
                          - pose.theta)
    omega = max(-omega_max, min(omega_max, k_omega * err))
    if abs(err) > math.pi / 3:
        v = 0.0
    else:
        v = min(v_max, k_v * dist_final) * math.cos(err)
        v = max(0.0, v)
    return FollowResult(v, omega, i, False)


def ring_vertices(sides: int, radius: float, origin: Pose2D
                  ) -> list[tuple[float, float]]:
    """Vertices of one patrol ring; vertex j sits at angle
    origin.theta + 2*pi*j/sides, radius meters from the origin position."""
    out = []
    for j in range(sides):
        ang = origin.theta + 2.0 * math.pi * j / sides
        out.append((origin.x + radius * math.cos(ang),
                    origin.y + radius * math.sin(ang)))
    return out


def patrol_waypoints(sides: int, radius: float, increment: float,
                     origin: Pose2D, rings: int) -> list[tuple[float, float]]:
    """Patrol vertices for the requested number of rings, inner to outer.
    Ring k has `sides` vertices at radius + k * increment from the origin."""
    if sides < 3:
        raise ValueError("patrol needs at least 3 sides")
    if radius <= 0 or increment <= 0:
        raise ValueError("patrol radius and increment must be positive")
    if rings < 0:
        raise ValueError("rings must be non-negative")
    out: list[tuple[float, float]] = []
    for k in range(rings):
        out.extend(ring_vertices(sides, radius + k * increment, origin))
    return out
