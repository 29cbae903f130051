"""Shared fixtures: tiny worlds assembled from ASCII art.

Most tests run on small hand-drawn grids. `world_text` builds a map document
from rows given top-first (same orientation as the file format), and
`make_world` parses it straight into (grid, landmarks).
"""
import numpy as np
import pytest

from gridnav.costmap import build_static_costmap
from gridnav.world import parse_world


def world_text(rows, resolution=0.5, origin=(0.0, 0.0), landmarks=(),
               extra_header=()):
    lines = [f"resolution {resolution}"]
    lines.append(f"origin {origin[0]} {origin[1]} 0")
    for lm_id, x, y in landmarks:
        lines.append(f"landmark {lm_id} {x} {y}")
    lines.extend(extra_header)
    lines.append("map:")
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def make_world(rows, resolution=0.5, origin=(0.0, 0.0), landmarks=()):
    return parse_world(world_text(rows, resolution, origin, landmarks))


def bordered_room(inner_width, inner_height, blocks=()):
    """Rows (top-first) of a walled room; blocks are (ix, iy) wall cells."""
    w = inner_width + 2
    h = inner_height + 2
    grid = [["." for _ in range(w)] for _ in range(h)]
    for ix in range(w):
        grid[0][ix] = grid[h - 1][ix] = "#"
    for iy in range(h):
        grid[iy][0] = grid[iy][w - 1] = "#"
    for ix, iy in blocks:
        grid[iy][ix] = "#"
    return ["".join(row) for row in reversed(grid)]


@pytest.fixture
def empty_room():
    """10x10 walled room at 0.5 m resolution (5x5 m inside)."""
    grid, landmarks = make_world(bordered_room(8, 8))
    return grid


@pytest.fixture
def room_costmap(empty_room):
    return build_static_costmap(empty_room, inscribed_radius=0.22)


def random_occupancy(rng, width, height, p_occupied=0.2, p_unknown=0.0):
    """Random cell array with FREE/OCCUPIED/UNKNOWN mixture."""
    draw = rng.random((height, width))
    cells = np.zeros((height, width), dtype=np.uint8)
    cells[draw < p_occupied] = 1
    cells[draw > 1.0 - p_unknown] = 2
    return cells
