"""Grid A* over the combined costmap, with line-of-sight path simplification.

Search runs on the 8-connected cell graph. A step into a neighbor of cell cost
c (0..252; anything >= 253 is untraversable) costs

    length * (1 + cost_weight * c / 255)        length = 1 or sqrt(2) cells

so the optimum trades path length against clearance. Diagonal moves are
forbidden when either adjacent axial cell is blocked, which keeps the path
from cutting corners through inflated space. Ties are broken deterministically
by (f, h, row-major cell index).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .costmap import INSCRIBED, Costmap
from .geometry import traverse_cells

SQRT2 = math.sqrt(2.0)

# (di, dj, step length); axial first, then diagonals.
_NEIGHBORS = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
)


class PlanningError(RuntimeError):
    pass


class StartBlocked(PlanningError):
    pass


class GoalBlocked(PlanningError):
    pass


class NoPathFound(PlanningError):
    pass


@dataclass
class Path:
    """Waypoints in world coordinates (cell centers) plus the planner's cost.

    The cost is the accumulated edge cost in cell units and is preserved as
    planner metadata when the waypoint chain is simplified.
    """

    waypoints: list[tuple[float, float]] = field(default_factory=list)
    cost: float = 0.0

    def length(self) -> float:
        total = 0.0
        for (ax, ay), (bx, by) in zip(self.waypoints, self.waypoints[1:]):
            total += math.sqrt((bx - ax) ** 2 + (by - ay) ** 2)
        return total


def _octile(dx: int, dy: int) -> float:
    dx = abs(dx)
    dy = abs(dy)
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def plan(costmap: Costmap, start: tuple[float, float], goal: tuple[float, float],
         cost_weight: float = 3.0) -> Path:
    """A* from start to goal (world coordinates, snapped to their cells).

    Returns the waypoint chain of cell centers, start cell first. Raises
    StartBlocked / GoalBlocked when an endpoint cell is outside the grid or
    carries cost >= INSCRIBED, NoPathFound when the frontier empties.
    """
    w = costmap.width
    h = costmap.height
    cost = costmap.cost
    sx, sy = costmap.world_to_cell(start[0], start[1])
    gx, gy = costmap.world_to_cell(goal[0], goal[1])
    if not costmap.in_bounds(sx, sy) or cost[sy, sx] >= INSCRIBED:
        raise StartBlocked(f"start cell ({sx}, {sy}) is not traversable")
    if not costmap.in_bounds(gx, gy) or cost[gy, gx] >= INSCRIBED:
        raise GoalBlocked(f"goal cell ({gx}, {gy}) is not traversable")

    start_idx = sy * w + sx
    goal_idx = gy * w + gx
    g = np.full(w * h, np.inf)
    parent = np.full(w * h, -1, dtype=np.int64)
    g[start_idx] = 0.0
    open_heap: list[tuple[float, float, int, float]] = []
    h0 = _octile(gx - sx, gy - sy)
    heapq.heappush(open_heap, (h0, h0, start_idx, 0.0))

    while open_heap:
        f, _, idx, g_pushed = heapq.heappop(open_heap)
        if g_pushed > g[idx]:
            continue  # stale entry
        if idx == goal_idx:
            return _reconstruct(costmap, parent, start_idx, goal_idx, g[goal_idx])
        cy, cx = divmod(idx, w)
        for di, dj, step_len in _NEIGHBORS:
            nx = cx + di
            ny = cy + dj
            if nx < 0 or nx >= w or ny < 0 or ny >= h:
                continue
            c = cost[ny, nx]
            if c >= INSCRIBED:
                continue
            if di != 0 and dj != 0:
                # No corner cutting: both axial cells must be traversable.
                if cost[cy, nx] >= INSCRIBED or cost[ny, cx] >= INSCRIBED:
                    continue
            ng = g[idx] + step_len * (1.0 + cost_weight * c / 255.0)
            nidx = ny * w + nx
            if ng < g[nidx]:
                g[nidx] = ng
                parent[nidx] = idx
                nh = _octile(gx - nx, gy - ny)
                heapq.heappush(open_heap, (ng + nh, nh, nidx, ng))
    raise NoPathFound(f"no route from cell ({sx}, {sy}) to ({gx}, {gy})")


def _reconstruct(costmap: Costmap, parent: np.ndarray, start_idx: int,
                 goal_idx: int, total_cost: float) -> Path:
    chain = []
    idx = goal_idx
    while idx != -1:
        iy, ix = divmod(idx, costmap.width)
        chain.append(costmap.cell_center(ix, iy))
        if idx == start_idx:
            break
        idx = int(parent[idx])
    chain.reverse()
    return Path(waypoints=chain, cost=float(total_cost))


def segment_clear(costmap: Costmap, a: tuple[float, float], b: tuple[float, float]) -> bool:
    """True when every cell crossed by segment a-b has cost < INSCRIBED."""
    for ix, iy in traverse_cells(a[0], a[1], b[0], b[1],
                                 costmap.origin.x, costmap.origin.y,
                                 costmap.resolution):
        if not costmap.in_bounds(ix, iy):
            return False
        if costmap.cost[iy, ix] >= INSCRIBED:
            return False
    return True


def simplify(path: Path, costmap: Costmap) -> Path:
    """Drop waypoints that a straight clear segment can skip.

    Greedy farthest-visible walk from the front of the chain. Visibility is a
    fixed predicate of the current costmap, so running simplify on its own
    output changes nothing. Endpoints are always kept.
    """
    pts = path.waypoints
    if len(pts) <= 2:
        return Path(waypoints=list(pts), cost=path.cost)
    keep = [0]
    i = 0
    last = len(pts) - 1
    while i < last:
        j = last
        while j > i + 1 and not segment_clear(costmap, pts[i], pts[j]):
            j -= 1
        keep.append(j)
        i = j
    return Path(waypoints=[pts[k] for k in keep], cost=path.cost)
