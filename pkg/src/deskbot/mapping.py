"""Build and maintain the line-segment map published to the console.

The pipeline is: raw scan -> world-frame points -> clusters split at range
discontinuities -> recursive split of each cluster at its worst-fitting
point -> total-least-squares segment per run. New segments are folded into
the running map by merging near-collinear overlapping pairs, and the map
is tidied for readability by aligning near-axis segments to the dominant
wall orientation and snapping nearby endpoints together.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import MIN_SEGMENT_LENGTH, Pose2D, Segment2D
from .world import LidarScan


@dataclass(frozen=True)
class MapParams:
    """Mapping thresholds; defaults sized for 1-degree beams in meter-scale
    rooms."""

    d_break: float = 0.3          # cluster break on range jump, meters
    eps_split: float = 0.03       # max point-to-line deviation, meters
    n_min: int = 4                # discard clusters smaller than this
    theta_merge: float = math.radians(10.0)
    d_merge: float = 0.08         # lateral separation for merging, meters
    g_merge: float = 0.2          # along-line gap for merging, meters
    theta_snap: float = math.radians(3.0)
    g_close: float = 0.1          # endpoint snap distance, meters

    def __post_init__(self):
        for name in ("d_break", "eps_split", "theta_merge", "d_merge",
                     "g_merge", "theta_snap", "g_close"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_min < 2:
            raise ValueError("n_min must be at least 2")


@dataclass(frozen=True)
class PerceivedMap:
    segments: tuple[Segment2D, ...] = ()
    version: int = 0


def scan_points(scan: LidarScan, pose: Pose2D) -> list[tuple[int, float, float, float]]:
    """World-frame hit points as (beam index, range, x, y), skipping
    no-return beams."""
    pts = []
    n = len(scan.ranges)
    step_angle = 2.0 * math.pi / n
    for i, r in enumerate(scan.ranges):
        if not math.isfinite(r):
            continue
        ang = pose.theta + i * step_angle
        pts.append((i, r, pose.x + r * math.cos(ang), pose.y + r * math.sin(ang)))
    return pts


def _clusters(points: list[tuple[int, float, float, float]],
              beams: int, d_break: float) -> list[np.ndarray]:
    """Group hit points into runs broken at missing beams or range jumps.
    The scan is circular, so a run ending at the last beam joins one
    starting at beam zero when the ranges are continuous across the wrap."""
    if not points:
        return []
    groups: list[list[tuple[int, float, float, float]]] = [[points[0]]]
    for prev, cur in zip(points, points[1:]):
        contiguous = cur[0] == prev[0] + 1 and abs(cur[1] - prev[1]) <= d_break
        if contiguous:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    if len(groups) > 1:
        first, last = groups[0], groups[-1]
        wraps = (last[-1][0] == beams - 1 and first[0][0] == 0
                 and abs(first[0][1] - last[-1][1]) <= d_break)
        if wraps:
            groups[0] = last + first
            groups.pop()
    return [np.array([(p[2], p[3]) for p in g]) for g in groups]


def _deviations(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Perpendicular distances from pts to the line through a and b."""
    d = b - a
    norm = float(np.hypot(d[0], d[1]))
    if norm < 1e-12:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    return np.abs((pts[:, 0] - a[0]) * d[1] - (pts[:, 1] - a[1]) * d[0]) / norm


def _split_runs(pts: np.ndarray, i0: int, i1: int, eps: float,
                out: list[tuple[int, int]]) -> None:
    if i1 - i0 < 2:
        out.append((i0, i1))
        return
    dev = _deviations(pts[i0:i1 + 1], pts[i0], pts[i1])
    j = int(np.argmax(dev))
    if dev[j] > eps and 0 < j < i1 - i0:
        _split_runs(pts, i0, i0 + j, eps, out)
        _split_runs(pts, i0 + j, i1, eps, out)
    else:
        out.append((i0, i1))


def _fit_segment(pts: np.ndarray) -> Segment2D | None:
    """Total-least-squares line through the points, clipped to their extent."""
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    if len(pts) == 2:
        direction = centered[1] - centered[0]
    else:
        cov = centered.T @ centered
        eigvals, eigvecs = np.linalg.eigh(cov)
        direction = eigvecs[:, int(np.argmax(eigvals))]
    norm = float(np.hypot(direction[0], direction[1]))
    if norm < 1e-12:
        return None
    u = direction / norm
    t = centered @ u
    lo, hi = float(t.min()), float(t.max())
    if hi - lo <= MIN_SEGMENT_LENGTH:
        return None
    p1 = centroid + lo * u
    p2 = centroid + hi * u
    return Segment2D(float(p1[0]), float(p1[1]), float(p2[0]), float(p2[1]))


def extract_segments(scan: LidarScan, pose: Pose2D,
                     params: MapParams = MapParams()) -> list[Segment2D]:
    """Fit line segments to one scan.

    Clusters smaller than n_min points are dropped. Each remaining cluster
    is recursively split at its maximum-deviation point until every point
    sits within eps_split of its run's chord; runs whose least-squares fit
    still leaves a point further than eps_split away are split again, so
    the coverage bound holds for the returned segments.
    """
    points = scan_points(scan, pose)
    segments: list[Segment2D] = []
    for cluster in _clusters(points, len(scan.ranges), params.d_break):
        if len(cluster) < params.n_min:
            continue
        runs: list[tuple[int, int]] = []
        _split_runs(cluster, 0, len(cluster) - 1, params.eps_split, runs)
        pending = list(runs)
        while pending:
            i0, i1 = pending.pop(0)
            if i1 - i0 < 1:
                continue
            pts = cluster[i0:i1 + 1]
            seg = _fit_segment(pts)
            if seg is None:
                continue
            dev = _deviations(pts, np.array(seg.p1()), np.array(seg.p2()))
            j = int(np.argmax(dev))
            if dev[j] > params.eps_split and 0 < j < i1 - i0:
                pending.insert(0, (i0 + j, i1))
                pending.insert(0, (i0, i0 + j))
            else:
                segments.append(seg)
    return segments


def _axial_diff(a1: float, a2: float) -> float:
    """Smallest angle between two undirected directions, in [0, pi/2]."""
    d = abs(a1 - a2) % math.pi
    return min(d, math.pi - d)


def _merge_candidate(a: Segment2D, b: Segment2D,
                     params: MapParams) -> Segment2D | None:
    """The covering segment if a and b satisfy the merge criterion."""
    if _axial_diff(a.angle(), b.angle()) >= params.theta_merge:
        return None
    la, lb = a.length(), b.length()
    # Length-weighted mean direction (axial, via doubled angles).
    sin2 = la * math.sin(2 * a.angle()) + lb * math.sin(2 * b.angle())
    cos2 = la * math.cos(2 * a.angle()) + lb * math.cos(2 * b.angle())
    mean_ang = 0.5 * math.atan2(sin2, cos2)
    ux, uy = math.cos(mean_ang), math.sin(mean_ang)
    ma, mb = a.midpoint(), b.midpoint()
    cx = (la * ma[0] + lb * mb[0]) / (la + lb)
    cy = (la * ma[1] + lb * mb[1]) / (la + lb)

    # Lateral separation between the two segments across the mean line.
    off_a = (ma[0] - cx) * -uy + (ma[1] - cy) * ux
    off_b = (mb[0] - cx) * -uy + (mb[1] - cy) * ux
    if abs(off_a - off_b) >= params.d_merge:
        return None

    # Along-line extents must overlap or nearly touch.
    ts_a = sorted(((p[0] - cx) * ux + (p[1] - cy) * uy) for p in (a.p1(), a.p2()))
    ts_b = sorted(((p[0] - cx) * ux + (p[1] - cy) * uy) for p in (b.p1(), b.p2()))
    gap = max(ts_a[0], ts_b[0]) - min(ts_a[1], ts_b[1])
    if gap >= params.g_merge:
        return None

    lo = min(ts_a[0], ts_b[0])
    hi = max(ts_a[1], ts_b[1])
    if hi - lo <= MIN_SEGMENT_LENGTH:
        return None
    return Segment2D(cx + lo * ux, cy + lo * uy, cx + hi * ux, cy + hi * uy)


def _segments_equal(a: Segment2D, b: Segment2D, tol: float = 1e-9) -> bool:
    same = (abs(a.x1 - b.x1) <= tol and abs(a.y1 - b.y1) <= tol
            and abs(a.x2 - b.x2) <= tol and abs(a.y2 - b.y2) <= tol)
    swapped = (abs(a.x1 - b.x2) <= tol and abs(a.y1 - b.y2) <= tol
               and abs(a.x2 - b.x1) <= tol and abs(a.y2 - b.y1) <= tol)
    return same or swapped


def _maps_equal(a: list[Segment2D], b: list[Segment2D], tol: float = 1e-9) -> bool:
    if len(a) != len(b):
        return False
    unmatched = list(b)
    for seg in a:
        for i, other in enumerate(unmatched):
            if _segments_equal(seg, other, tol):
                unmatched.pop(i)
                break
        else:
            return False
    return True


def _merge_closure(segments: list[Segment2D], params: MapParams) -> list[Segment2D]:
    """Merge pairs until no pair satisfies the criterion."""
    segs = list(segments)
    changed = True
    while changed:
        changed = False
        n = len(segs)
        for i in range(n):
            for j in range(i + 1, n):
                merged = _merge_candidate(segs[i], segs[j], params)
                if merged is not None:
                    if _segments_equal(merged, segs[i]) and _segments_equal(
                            merged, segs[j]):
                        # both already covered; drop the duplicate
                        merged = segs[i]
                    segs = ([s for k, s in enumerate(segs) if k not in (i, j)]
                            + [merged])
                    changed = True
                    break
            if changed:
                break
    return segs


def merge_into_map(pmap: PerceivedMap, new_segments: list[Segment2D],
                   params: MapParams = MapParams()) -> PerceivedMap:
    """Fold new segments into the map, keeping it free of near-duplicates.

    The version is bumped only when the merged contents actually differ
    from the current map.
    """
    if not new_segments:
        return pmap
    merged = _merge_closure(list(pmap.segments) + list(new_segments), params)
    if _maps_equal(merged, list(pmap.segments)):
        return pmap
    return PerceivedMap(segments=tuple(merged), version=pmap.version + 1)


def has_near_duplicates(segments: tuple[Segment2D, ...],
                        params: MapParams = MapParams()) -> bool:
    segs = list(segments)
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if _merge_candidate(segs[i], segs[j], params) is not None:
                return True
    return False


def dominant_orientation_deg(segments: list[Segment2D]) -> int:
    """Modal segment angle folded into [0, 90), quantized to whole degrees.
    Ties break toward the smaller angle."""
    counts: dict[int, int] = {}
    for s in segments:
        deg = round(math.degrees(s.angle()) % 90.0) % 90
        counts[deg] = counts.get(deg, 0) + 1
    best = min(counts, key=lambda d: (-counts[d], d))
    return best


_FIX_EPS = 1e-9


def _align_pass(segs: list[list[float]], delta_rad: float,
                theta_snap: float) -> bool:
    """Rotate near-axis segments about their midpoints onto the axis grid
    defined by delta_rad (mod pi/2). Returns True when anything moved."""
    changed = False
    for s in segs:
        ang = math.atan2(s[3] - s[1], s[2] - s[0])
        dev = (ang - delta_rad) % (math.pi / 2)
        if dev > math.pi / 4:
            dev -= math.pi / 2
        if _FIX_EPS < abs(dev) <= theta_snap:
            target = ang - dev
            mx, my = (s[0] + s[2]) / 2.0, (s[1] + s[3]) / 2.0
            half = math.hypot(s[2] - s[0], s[3] - s[1]) / 2.0
            ux, uy = math.cos(target), math.sin(target)
            s[0], s[1] = mx - half * ux, my - half * uy
            s[2], s[3] = mx + half * ux, my + half * uy
            changed = True
    return changed


def _snap_pass(segs: list[list[float]], g_close: float) -> bool:
    """Snap endpoint clusters (endpoints of different segments within
    g_close) to their common centroid. Returns True when anything moved."""
    endpoints = [(i, e) for i in range(len(segs)) for e in (0, 1)]
    parent = list(range(len(endpoints)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def coords(idx):
        seg_i, end = endpoints[idx]
        off = end * 2
        return segs[seg_i][off], segs[seg_i][off + 1]

    for i in range(len(endpoints)):
        for j in range(i + 1, len(endpoints)):
            if endpoints[i][0] == endpoints[j][0]:
                continue
            xi, yi = coords(i)
            xj, yj = coords(j)
            if math.hypot(xi - xj, yi - yj) <= g_close:
                parent[find(i)] = find(j)

    clusters: dict[int, list[int]] = {}
    for i in range(len(endpoints)):
        clusters.setdefault(find(i), []).append(i)

    changed = False
    for members in clusters.values():
        if len(members) < 2:
            continue
        xs = [coords(m)[0] for m in members]
        ys = [coords(m)[1] for m in members]
        spread = max(math.hypot(x - xs[0], y - ys[0]) for x, y in zip(xs, ys))
        if spread <= _FIX_EPS:
            continue
        cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
        for m in members:
            seg_i, end = endpoints[m]
            off = end * 2
            segs[seg_i][off], segs[seg_i][off + 1] = cx, cy
        changed = True
    return changed


def tidy(pmap: PerceivedMap, params: MapParams = MapParams()) -> PerceivedMap:
    """Deterministic map clean-up: align near-axis segments to the dominant
    wall orientation and close small corner gaps.

    Alignment and snapping feed each other (a snap perturbs an angle, a
    rotation reopens a hair of gap), so the two passes repeat until neither
    changes anything; the perturbations shrink geometrically, which makes
    the result an exact fixed point: tidy(tidy(m)) == tidy(m).
    """
    if not pmap.segments:
        return pmap
    delta_rad = math.radians(dominant_orientation_deg(list(pmap.segments)))
    segs = [[s.x1, s.y1, s.x2, s.y2] for s in pmap.segments]
    for _ in range(200):
        moved = _align_pass(segs, delta_rad, params.theta_snap)
        moved |= _snap_pass(segs, params.g_close)
        if not moved:
            break
    out = []
    for s in segs:
        if math.hypot(s[2] - s[0], s[3] - s[1]) > MIN_SEGMENT_LENGTH:
            out.append(Segment2D(s[0], s[1], s[2], s[3]))
    if _maps_equal(out, list(pmap.segments), tol=0.0):
        return pmap
    return PerceivedMap(segments=tuple(out), version=pmap.version + 1)
