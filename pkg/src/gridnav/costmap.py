"""Layered costmaps: static inflation plus a scan-driven local window.

Cost semantics follow the usual 8-bit convention:

    0          free
    1..252     inflated cost, decaying with distance from the nearest obstacle
    253        inscribed: the robot center here implies the footprint overlaps
    254        lethal: the cell itself is an obstacle
    255        unknown

Inflation of a free cell at distance d from the nearest lethal cell:

    d <= inscribed_radius                 -> 253
    inscribed_radius < d <= inflation_r   -> round(252 * exp(-decay * (d - inscribed_radius)))
    d > inflation_radius                  -> 0

The local layer keeps per-cell marks raised by LiDAR endpoints. A mark decays
after `persistence` scans have observed its cell free, and the combined cost
inside the current window is recomposed from static + marks on every update;
cells outside the window always read the static cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import Pose2D
from .world import OCCUPIED as CELL_OCCUPIED
from .world import UNKNOWN as CELL_UNKNOWN
from .world import LidarScan, OccupancyGrid

COST_FREE = 0
INSCRIBED = 253
LETHAL = 254
UNKNOWN_COST = 255


def cost_for_distance(d: float, inscribed_radius: float, inflation_radius: float,
                      decay: float) -> int:
    """Inflation cost of a free cell at distance d from the nearest obstacle."""
    if d <= inscribed_radius:
        return INSCRIBED
    if d > inflation_radius:
        return COST_FREE
    return round(252.0 * math.exp(-decay * (d - inscribed_radius)))


def inflation_offsets(resolution: float, inscribed_radius: float,
                      inflation_radius: float, decay: float) -> list[tuple[int, int, int]]:
    """(di, dj, cost) for every cell offset within the inflation radius."""
    reach = int(math.ceil(inflation_radius / resolution)) + 1
    out = []
    for dj in range(-reach, reach + 1):
        for di in range(-reach, reach + 1):
            d = resolution * math.sqrt(di * di + dj * dj)
            if d > inflation_radius:
                continue
            out.append((di, dj, cost_for_distance(d, inscribed_radius,
                                                  inflation_radius, decay)))
    return out


@dataclass
class LocalWindow:
    """Rolling window the local layer operates in, centered on the robot."""

    side: float = 4.0
    persistence: int = 3
    center: Pose2D | None = None

    def __post_init__(self):
        if self.side <= 0.0:
            raise ValueError("window side must be positive")
        if self.persistence < 1:
            raise ValueError("persistence must be >= 1")


@dataclass
class Costmap:
    """Static inflated costs plus the dynamic mark bookkeeping."""

    width: int
    height: int
    resolution: float
    origin: Pose2D
    static_cost: np.ndarray
    cost: np.ndarray
    inscribed_radius: float
    inflation_radius: float
    decay: float
    _offsets: list[tuple[int, int, int]] = field(repr=False, default_factory=list)
    _marks: dict[tuple[int, int], int] = field(repr=False, default_factory=dict)
    _marks_before: dict[tuple[int, int], int] = field(repr=False, default_factory=dict)
    _last_stamp: float | None = field(repr=False, default=None)
    window_bounds: tuple[int, int, int, int] | None = None  # ix0, iy0, ix1, iy1

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.origin.x) / self.resolution)),
                int(math.floor((y - self.origin.y) / self.resolution)))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin.x + (ix + 0.5) * self.resolution,
                self.origin.y + (iy + 0.5) * self.resolution)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def marked_cells(self) -> dict[tuple[int, int], int]:
        return dict(self._marks)


def cost_at(costmap: Costmap, point: tuple[float, float]) -> int:
    """Combined cost under a world point; outside the grid reads LETHAL."""
    ix, iy = costmap.world_to_cell(point[0], point[1])
    if not costmap.in_bounds(ix, iy):
        return LETHAL
    return int(costmap.cost[iy, ix])


def build_static_costmap(grid: OccupancyGrid, inscribed_radius: float,
                         inflation_radius: float = 0.55,
                         decay: float = 10.0) -> Costmap:
    """Inflate a static occupancy grid into a costmap.

    OCCUPIED cells become LETHAL, UNKNOWN stays UNKNOWN, and free cells get the
    exponential inflation cost of their nearest obstacle. Scatter runs one
    vectorized max per offset, which is exact because the per-offset cost is
    non-increasing in distance.
    """
    if not (0.0 < inscribed_radius <= inflation_radius):
        raise ValueError("require 0 < inscribed_radius <= inflation_radius")
    if decay <= 0.0:
        raise ValueError("decay must be positive")
    h, w = grid.cells.shape
    cost = np.zeros((h, w), dtype=np.uint8)
    lethal = grid.cells == CELL_OCCUPIED
    cost[lethal] = LETHAL
    cost[grid.cells == CELL_UNKNOWN] = UNKNOWN_COST
    offsets = inflation_offsets(grid.resolution, inscribed_radius,
                                inflation_radius, decay)
    for di, dj, c in offsets:
        if c == 0 or (di == 0 and dj == 0):
            continue
        src_y = slice(max(0, -dj), min(h, h - dj))
        src_x = slice(max(0, -di), min(w, w - di))
        dst_y = slice(max(0, dj), min(h, h + dj))
        dst_x = slice(max(0, di), min(w, w + di))
        dst = cost[dst_y, dst_x]
        np.maximum(dst, np.where(lethal[src_y, src_x], np.uint8(c), np.uint8(0)),
                   out=dst)
    return Costmap(width=w, height=h, resolution=grid.resolution, origin=grid.origin,
                   static_cost=cost.copy(), cost=cost,
                   inscribed_radius=inscribed_radius,
                   inflation_radius=inflation_radius, decay=decay,
                   _offsets=offsets)


def _window_cell_bounds(costmap: Costmap, window: LocalWindow,
                        pose: Pose2D) -> tuple[int, int, int, int]:
    half = window.side / 2.0
    res = costmap.resolution
    ix0 = max(0, int(math.floor((pose.x - half - costmap.origin.x) / res)))
    iy0 = max(0, int(math.floor((pose.y - half - costmap.origin.y) / res)))
    ix1 = min(costmap.width, int(math.ceil((pose.x + half - costmap.origin.x) / res)))
    iy1 = min(costmap.height, int(math.ceil((pose.y + half - costmap.origin.y) / res)))
    return ix0, iy0, ix1, iy1


def _beam_endpoints(scan: LidarScan, pose: Pose2D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World endpoints of finite-range beams, plus their beam indices."""
    rel = scan.relative_angles()
    finite = np.isfinite(scan.ranges)
    idx = np.nonzero(finite)[0]
    angles = pose.theta + rel[idx]
    r = scan.ranges[idx]
    return idx, pose.x + r * np.cos(angles), pose.y + r * np.sin(angles)


def _beam_through_cell(px: float, py: float, ex: float, ey: float,
                       cx0: float, cy0: float, cx1: float, cy1: float) -> bool:
    """Does segment (px,py)->(ex,ey) pass completely through the cell AABB?

    Slab test on the parametrized segment. The exit must come strictly before
    the endpoint, so a beam that merely ends inside the cell (that is, a hit)
    never reads as free space.
    """
    dx = ex - px
    dy = ey - py
    t0 = 0.0
    t1 = math.inf
    for delta, lo, hi, p in ((dx, cx0, cx1, px), (dy, cy0, cy1, py)):
        if delta == 0.0:
            if p < lo or p > hi:
                return False
            continue
        ta = (lo - p) / delta
        tb = (hi - p) / delta
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 >= t1:
            return False
    return t1 < 1.0


def update_local(costmap: Costmap, window: LocalWindow, scan: LidarScan,
                 robot_pose: Pose2D) -> Costmap:
    """Fold one scan into the local layer and recompose the window costs.

    Beam endpoints inside the window raise LETHAL marks (with inflation) on
    their cells. A mark's time-to-live resets to `persistence` on a hit and
    drops by one each scan that observes the cell free, so a vanished obstacle
    is fully cleared `persistence` scans later. Observation beats a
    simultaneous hit: a beam passing completely through a cell proves free
    space along that line of sight, and an endpoint landing there on the same
    scan is range noise spilling over a boundary. Real obstacle cells are
    never traversed, so their marks always refresh. Re-applying the same scan
    (same stamp) is idempotent: the transition is replayed from the pre-scan
    state. Cells outside the window always read static cost.
    """
    if scan.stamp == costmap._last_stamp:
        costmap._marks = dict(costmap._marks_before)  # replay the same transition
    else:
        costmap._marks_before = dict(costmap._marks)
        costmap._last_stamp = scan.stamp

    prev_bounds = costmap.window_bounds
    ix0, iy0, ix1, iy1 = _window_cell_bounds(costmap, window, robot_pose)

    # Hits: endpoints of returning beams, inside the window, on inflatable cells.
    robot_cell = costmap.world_to_cell(robot_pose.x, robot_pose.y)
    _, exs, eys = _beam_endpoints(scan, robot_pose)
    res = costmap.resolution
    hit_cells: set[tuple[int, int]] = set()
    for ex, ey in zip(exs, eys):
        ix = int(math.floor((ex - costmap.origin.x) / res))
        iy = int(math.floor((ey - costmap.origin.y) / res))
        if not (ix0 <= ix < ix1 and iy0 <= iy < iy1):
            continue
        if (ix, iy) == robot_cell:
            continue
        if costmap.static_cost[iy, ix] >= LETHAL:
            continue
        hit_cells.add((ix, iy))

    # Per-cell transition over existing marks and fresh hits. Out-of-window
    # marks are dropped with their cells reverting to static below.
    if hit_cells or costmap._marks:
        rel = scan.relative_angles()
        n_beams = len(scan.ranges)
        half_fov = scan.params.fov_rad / 2.0
        ang_step = scan.params.angular_step_rad
        surviving: dict[tuple[int, int], int] = {}
        for cell in sorted(set(costmap._marks) | hit_cells):
            ix, iy = cell
            ttl = costmap._marks.get(cell)
            if not (ix0 <= ix < ix1 and iy0 <= iy < iy1):
                continue
            # Beams able to cross the cell lie in the bearing interval its
            # corners subtend; a fixed neighborhood around the center bearing
            # misses crossings at oblique incidence.
            cx0 = costmap.origin.x + ix * res
            cy0 = costmap.origin.y + iy * res
            rb = [math.remainder(math.atan2(cy - robot_pose.y, cx - robot_pose.x)
                                 - robot_pose.theta, 2.0 * math.pi)
                  for cx, cy in ((cx0, cy0), (cx0 + res, cy0),
                                 (cx0, cy0 + res), (cx0 + res, cy0 + res))]
            bmin = min(rb)
            bmax = max(rb)
            observable = (bmax - bmin <= math.pi and bmin <= half_fov
                          and bmax >= -half_fov)
            seen_free = False
            if observable:
                b0 = max(0, int(math.floor((bmin + half_fov) / ang_step)))
                b1 = min(n_beams - 1, int(math.ceil((bmax + half_fov) / ang_step)))
                for b in range(b0, b1 + 1):
                    r = scan.ranges[b]
                    if not math.isfinite(r):
                        r = scan.params.range_max
                    a = robot_pose.theta + rel[b]
                    ex = robot_pose.x + r * math.cos(a)
                    ey = robot_pose.y + r * math.sin(a)
                    if _beam_through_cell(robot_pose.x, robot_pose.y, ex, ey,
                                          cx0, cy0, cx0 + res, cy0 + res):
                        seen_free = True
                        break
            if seen_free:
                if ttl is not None and ttl > 1:
                    surviving[cell] = ttl - 1
            elif cell in hit_cells:
                surviving[cell] = window.persistence
            elif ttl is not None:
                surviving[cell] = ttl
        costmap._marks = surviving

    # Recompose: previous window back to static, current window = static + marks.
    if prev_bounds is not None:
        px0, py0, px1, py1 = prev_bounds
        costmap.cost[py0:py1, px0:px1] = costmap.static_cost[py0:py1, px0:px1]
    costmap.cost[iy0:iy1, ix0:ix1] = costmap.static_cost[iy0:iy1, ix0:ix1]
    for (ix, iy) in costmap._marks:
        costmap.cost[iy, ix] = max(int(costmap.cost[iy, ix]), LETHAL)
        for di, dj, c in costmap._offsets:
            tx = ix + di
            ty = iy + dj
            if ix0 <= tx < ix1 and iy0 <= ty < iy1 and c > costmap.cost[ty, tx]:
                costmap.cost[ty, tx] = c
    costmap.window_bounds = (ix0, iy0, ix1, iy1)
    window.center = robot_pose
    return costmap


def export_pgm(costmap: Costmap) -> str:
    """Render the combined cost layer as a plain-text portable graymap (P2)."""
    lines = ["P2", f"{costmap.width} {costmap.height}", "255"]
    for iy in range(costmap.height - 1, -1, -1):  # PGM rows run top-down
        lines.append(" ".join(str(int(v)) for v in costmap.cost[iy]))
    return "\n".join(lines) + "\n"
