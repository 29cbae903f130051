"""Small planar geometry helpers shared by planners, metrics and the navigator."""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence


def point_segment_nearest(px: float, py: float,
                          ax: float, ay: float,
                          bx: float, by: float) -> tuple[float, float, float]:
    """Nearest point to (px, py) on segment a-b; returns (qx, qy, distance)."""
    vx = bx - ax
    vy = by - ay
    l2 = vx * vx + vy * vy
    if l2 == 0.0:
        qx, qy = ax, ay
    else:
        t = ((px - ax) * vx + (py - ay) * vy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        qx = ax + t * vx
        qy = ay + t * vy
    dx = px - qx
    dy = py - qy
    return qx, qy, math.sqrt(dx * dx + dy * dy)


def nearest_on_polyline(points: Sequence[tuple[float, float]],
                        px: float, py: float) -> tuple[float, float, float, int]:
    """Nearest point to (px, py) on a polyline.

    Returns (qx, qy, distance, segment_index); for a single-point polyline the
    segment index is 0 and the point itself is returned. Ties keep the earliest
    segment.
    """
    if not points:
        raise ValueError("empty polyline")
    if len(points) == 1:
        qx, qy = points[0]
        dx = px - qx
        dy = py - qy
        return qx, qy, math.sqrt(dx * dx + dy * dy), 0
    best = None
    for i in range(len(points) - 1):
        ax, ay = points[i]
        bx, by = points[i + 1]
        qx, qy, d = point_segment_nearest(px, py, ax, ay, bx, by)
        if best is None or d < best[2]:
            best = (qx, qy, d, i)
    return best


def polyline_distance(points: Sequence[tuple[float, float]], px: float, py: float) -> float:
    return nearest_on_polyline(points, px, py)[2]


def cell_of(x: float, y: float, origin_x: float, origin_y: float, resolution: float) -> tuple[int, int]:
    return (int(math.floor((x - origin_x) / resolution)),
            int(math.floor((y - origin_y) / resolution)))


def traverse_cells(x0: float, y0: float, x1: float, y1: float,
                   origin_x: float, origin_y: float,
                   resolution: float) -> Iterator[tuple[int, int]]:
    """Grid cells crossed by the segment (x0,y0)-(x1,y1), endpoints included.

    Steps one cell boundary at a time (no skipped cells), so consecutive cells
    are 4-connected. Indices are not bounds-checked; callers clip.
    """
    ix, iy = cell_of(x0, y0, origin_x, origin_y, resolution)
    ix1, iy1 = cell_of(x1, y1, origin_x, origin_y, resolution)
    yield ix, iy
    dx = x1 - x0
    dy = y1 - y0
    length = math.sqrt(dx * dx + dy * dy)
    if length == 0.0:
        return
    inv_len = 1.0 / length
    ux = dx * inv_len
    uy = dy * inv_len
    rel_x = x0 - origin_x
    rel_y = y0 - origin_y
    if ux > 0.0:
        step_x, tmax_x, tdelta_x = 1, ((ix + 1) * resolution - rel_x) / ux, resolution / ux
    elif ux < 0.0:
        step_x, tmax_x, tdelta_x = -1, (ix * resolution - rel_x) / ux, -resolution / ux
    else:
        step_x, tmax_x, tdelta_x = 0, math.inf, math.inf
    if uy > 0.0:
        step_y, tmax_y, tdelta_y = 1, ((iy + 1) * resolution - rel_y) / uy, resolution / uy
    elif uy < 0.0:
        step_y, tmax_y, tdelta_y = -1, (iy * resolution - rel_y) / uy, -resolution / uy
    else:
        step_y, tmax_y, tdelta_y = 0, math.inf, math.inf
    guard = 0
    limit = 4 * (abs(ix1 - ix) + abs(iy1 - iy) + 2)
    # Crossings past the segment length never run: an endpoint sitting
    # exactly on a cell boundary would otherwise march the walk clean past
    # the end cell (the floor convention puts that cell on the far side of
    # the final crossing).
    last_step_x = False
    while (ix, iy) != (ix1, iy1) and guard < limit:
        guard += 1
        if tmax_x < tmax_y:
            if tmax_x > length:
                break
            ix += step_x
            tmax_x += tdelta_x
            last_step_x = True
        elif tmax_y < tmax_x:
            if tmax_y > length:
                break
            iy += step_y
            tmax_y += tdelta_y
            last_step_x = False
        else:
            # Exact corner crossing: both boundaries fall at the same t.
            # Cross both axes, surfacing one side cell to stay
            # 4-connected; when the corner is the segment end, the end
            # cell may lie on either side of it, so step toward it.
            if tmax_x > length:
                break
            last_step_x = False
            if (ix, iy + step_y) == (ix1, iy1):
                iy += step_y
                tmax_y += tdelta_y
            else:
                ix += step_x
                tmax_x += tdelta_x
                if (ix, iy) != (ix1, iy1):
                    yield ix, iy
                    guard += 1
                    iy += step_y
                    tmax_y += tdelta_y
        yield ix, iy
    # A boundary endpoint leaves the walk at most one cell shy per axis.
    # With a diagonal gap, route around the side the walk did not come from.
    if (ix, iy) != (ix1, iy1):
        if ix != ix1 and iy != iy1:
            yield ((ix, iy1) if last_step_x else (ix1, iy))
        yield ix1, iy1
