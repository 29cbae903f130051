"""Grid ray traversal kernels (numba-compiled).

Amanatides & Woo style DDA: the ray visits every cell it passes through, one
boundary crossing at a time, so thin walls are never stepped over. Distances
are returned in meters along the ray:

    >= 0.0   distance to the boundary of the first blocking cell
    -1.0     no blocking cell within range_max (or ray left the grid)
    -2.0     ray origin outside the grid
"""
from __future__ import annotations

import math

from numba import njit


@njit(cache=True)
def raycast_kernel(cells, blocking, px, py, angle, range_max, ox, oy, resolution):
    h, w = cells.shape
    ix = int(math.floor((px - ox) / resolution))
    iy = int(math.floor((py - oy) / resolution))
    if ix < 0 or ix >= w or iy < 0 or iy >= h:
        return -2.0
    if cells[iy, ix] == blocking:
        return 0.0
    dx = math.cos(angle)
    dy = math.sin(angle)
    rel_x = px - ox
    rel_y = py - oy
    if dx > 0.0:
        step_x = 1
        tmax_x = ((ix + 1) * resolution - rel_x) / dx
        tdelta_x = resolution / dx
    elif dx < 0.0:
        step_x = -1
        tmax_x = (ix * resolution - rel_x) / dx
        tdelta_x = -resolution / dx
    else:
        step_x = 0
        tmax_x = math.inf
        tdelta_x = math.inf
    if dy > 0.0:
        step_y = 1
        tmax_y = ((iy + 1) * resolution - rel_y) / dy
        tdelta_y = resolution / dy
    elif dy < 0.0:
        step_y = -1
        tmax_y = (iy * resolution - rel_y) / dy
        tdelta_y = -resolution / dy
    else:
        step_y = 0
        tmax_y = math.inf
        tdelta_y = math.inf
    while True:
        if tmax_x < tmax_y:
            t = tmax_x
            ix += step_x
            tmax_x += tdelta_x
        else:
            t = tmax_y
            iy += step_y
            tmax_y += tdelta_y
        if t > range_max:
            return -1.0
        if ix < 0 or ix >= w or iy < 0 or iy >= h:
            return -1.0
        if cells[iy, ix] == blocking:
            return t


@njit(cache=True)
def scan_kernel(cells, blocking, px, py, heading, fov, angular_step, n_beams,
                range_max, ox, oy, resolution, out):
    for i in range(n_beams):
        angle = heading - fov / 2.0 + i * angular_step
        out[i] = raycast_kernel(cells, blocking, px, py, angle, range_max,
                                ox, oy, resolution)
