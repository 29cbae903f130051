"""Costmap inflation and the scan-driven local layer.

The vectorized inflation is checked against an exhaustive per-cell oracle that
scans every lethal cell for every free cell. Local-layer tests run physically
consistent zero-noise scans in a room big enough that no wall face lands an
endpoint inside the window, so mark sets are exact.
"""
import math

import numpy as np
import pytest

from conftest import bordered_room, make_world, random_occupancy
from gridnav.costmap import (COST_FREE, INSCRIBED, LETHAL, UNKNOWN_COST,
                             Costmap, LocalWindow, build_static_costmap,
                             cost_at, cost_for_distance, export_pgm,
                             inflation_offsets, update_local)
from gridnav.kinematics import Pose2D
from gridnav.world import (FREE, OCCUPIED, UNKNOWN, LidarParams, LidarScan,
                           OccupancyGrid, simulate_scan)


def inflate_oracle(cells, resolution, inscribed_radius, inflation_radius, decay):
    """Exhaustive per-cell inflation, mirroring the exact float expressions."""
    h, w = cells.shape
    out = np.zeros((h, w), dtype=np.uint8)
    lethal = [(ix, iy) for iy in range(h) for ix in range(w)
              if cells[iy, ix] == OCCUPIED]
    for iy in range(h):
        for ix in range(w):
            if cells[iy, ix] == OCCUPIED:
                out[iy, ix] = LETHAL
            elif cells[iy, ix] == UNKNOWN:
                out[iy, ix] = UNKNOWN_COST
            else:
                best = 0
                for lx, ly in lethal:
                    di = ix - lx
                    dj = iy - ly
                    d = resolution * math.sqrt(di * di + dj * dj)
                    if d > inflation_radius:
                        continue
                    if d <= inscribed_radius:
                        c = INSCRIBED
                    else:
                        c = round(252.0 * math.exp(-decay * (d - inscribed_radius)))
                    best = max(best, c)
                out[iy, ix] = best
    return out


class TestCostForDistance:
    def test_exact_values(self):
        assert cost_for_distance(0.0, 0.2, 0.55, 10.0) == INSCRIBED
        assert cost_for_distance(0.2, 0.2, 0.55, 10.0) == INSCRIBED
        assert cost_for_distance(0.3, 0.2, 0.55, 10.0) == 93
        assert cost_for_distance(0.25, 0.2, 0.55, 10.0) == 153
        assert cost_for_distance(0.55, 0.2, 0.55, 10.0) == 8
        assert cost_for_distance(0.5501, 0.2, 0.55, 10.0) == COST_FREE

    def test_never_returns_lethal(self):
        for i in range(200):
            d = i * 0.01
            assert cost_for_distance(d, 0.2, 0.55, 10.0) <= INSCRIBED

    def test_monotone_in_distance(self):
        samples = [cost_for_distance(i * 0.005, 0.22, 0.6, 8.0)
                   for i in range(150)]
        assert all(a >= b for a, b in zip(samples, samples[1:]))


class TestInflationOffsets:
    def test_contains_origin_and_axis_neighbors(self):
        offs = {(di, dj): c
                for di, dj, c in inflation_offsets(0.5, 0.22, 0.55, 10.0)}
        assert offs[(0, 0)] == INSCRIBED
        assert offs[(1, 0)] == offs[(0, -1)] == 15
        assert (1, 1) not in offs  # d = 0.707 exceeds the radius

    def test_all_within_radius_and_symmetric(self):
        offs = inflation_offsets(0.1, 0.12, 0.3, 8.0)
        table = {(di, dj): c for di, dj, c in offs}
        for di, dj, c in offs:
            assert 0.1 * math.sqrt(di * di + dj * dj) <= 0.3
            assert table[(-di, -dj)] == c
            assert table[(dj, di)] == c


class TestBuildStatic:
    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            cells = random_occupancy(rng, 20, 15, p_occupied=0.2, p_unknown=0.1)
            grid = OccupancyGrid(20, 15, 0.1, Pose2D(), cells)
            cm = build_static_costmap(grid, 0.12, 0.3, 8.0)
            expect = inflate_oracle(cells, 0.1, 0.12, 0.3, 8.0)
            assert np.array_equal(cm.static_cost, expect)
            assert np.array_equal(cm.cost, expect)

    def test_empty_grid_costs_nothing(self):
        grid = OccupancyGrid(5, 4, 0.5, Pose2D(),
                             np.zeros((4, 5), dtype=np.uint8))
        cm = build_static_costmap(grid, 0.22)
        assert not cm.cost.any()

    def test_unknown_neither_inflates_nor_takes_inflation(self):
        grid, _ = make_world(["?.#"], resolution=0.5)
        cm = build_static_costmap(grid, 0.22, 0.55, 10.0)
        assert cm.cost[0, 0] == UNKNOWN_COST
        assert cm.cost[0, 1] == 15  # from the lethal cell, not the unknown
        assert cm.cost[0, 2] == LETHAL

    def test_parameter_validation(self):
        grid, _ = make_world(["."])
        with pytest.raises(ValueError):
            build_static_costmap(grid, 0.0)
        with pytest.raises(ValueError):
            build_static_costmap(grid, 0.6, 0.55)
        with pytest.raises(ValueError):
            build_static_costmap(grid, 0.22, 0.55, decay=0.0)


class TestCostAt:
    def test_reads_combined_layer(self, room_costmap):
        assert cost_at(room_costmap, (0.25, 0.25)) == LETHAL
        assert cost_at(room_costmap, (2.5, 2.5)) == COST_FREE

    def test_outside_grid_is_lethal(self, room_costmap):
        assert cost_at(room_costmap, (-1.0, 2.0)) == LETHAL
        assert cost_at(room_costmap, (2.0, 99.0)) == LETHAL


class TestLocalWindow:
    def test_validation(self):
        with pytest.raises(ValueError):
            LocalWindow(side=0.0)
        with pytest.raises(ValueError):
            LocalWindow(persistence=0)


# Geometry shared by the local-layer tests: a 15 m room whose walls are
# beyond lidar range or outside the window, a one-cell obstacle present only
# in the scanned world, and the robot 3 m west of it. Every zero-noise
# endpoint then lands on the obstacle's west face, cell (22, 16).
ROOM = bordered_room(28, 28)
OBSTACLE = (22, 16)
ROBOT = Pose2D(8.0, 8.25, 0.0)
ZERO_NOISE = LidarParams(noise_sigma=0.0)


@pytest.fixture
def local_cm():
    grid, _ = make_world(ROOM)
    return build_static_costmap(grid, inscribed_radius=0.22)


def scan_room(pose, stamp, blocks=()):
    grid, _ = make_world(bordered_room(28, 28, blocks=blocks))
    return simulate_scan(grid, pose, ZERO_NOISE, np.random.default_rng(0),
                         stamp=stamp)


class TestUpdateLocal:
    def test_endpoints_mark_and_inflate(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        static_before = local_cm.static_cost.copy()
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        ix, iy = OBSTACLE
        assert local_cm.marked_cells() == {OBSTACLE: 3}
        assert local_cm.cost[iy, ix] == LETHAL
        assert local_cm.cost[iy, ix - 1] == 15
        assert local_cm.cost[iy + 1, ix] == 15
        assert np.array_equal(local_cm.static_cost, static_before)

    def test_cells_outside_window_read_static(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        ix0, iy0, ix1, iy1 = local_cm.window_bounds
        mask = np.ones_like(local_cm.cost, dtype=bool)
        mask[iy0:iy1, ix0:ix1] = False
        assert np.array_equal(local_cm.cost[mask], local_cm.static_cost[mask])

    def test_marks_decay_after_persistence_free_scans(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        for stamp, ttl in [(1.0, 2), (2.0, 1)]:
            update_local(local_cm, window, scan_room(ROBOT, stamp), ROBOT)
            assert local_cm.marked_cells() == {OBSTACLE: ttl}
        update_local(local_cm, window, scan_room(ROBOT, 3.0), ROBOT)
        assert local_cm.marked_cells() == {}
        assert np.array_equal(local_cm.cost, local_cm.static_cost)

    def test_hit_refreshes_a_decaying_mark(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        update_local(local_cm, window, scan_room(ROBOT, 1.0), ROBOT)
        assert local_cm.marked_cells()[OBSTACLE] == 2
        update_local(local_cm, window, scan_room(ROBOT, 2.0, [OBSTACLE]), ROBOT)
        assert local_cm.marked_cells()[OBSTACLE] == 3

    def test_same_stamp_replay_is_idempotent(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        free_scan = scan_room(ROBOT, 1.0)
        update_local(local_cm, window, free_scan, ROBOT)
        assert local_cm.marked_cells() == {OBSTACLE: 2}
        snapshot = local_cm.cost.copy()
        update_local(local_cm, window, free_scan, ROBOT)
        assert local_cm.marked_cells() == {OBSTACLE: 2}
        assert np.array_equal(local_cm.cost, snapshot)

    def test_pass_through_beats_simultaneous_endpoint(self, local_cm):
        # Pull the straight-ahead beam a quarter meter short, planting its
        # endpoint one cell in front of the obstacle. Oblique beams still
        # pass clean through that cell, so it must not be marked.
        window = LocalWindow(side=8.0, persistence=3)
        scan = scan_room(ROBOT, 0.0, [OBSTACLE])
        center = scan.ranges.copy()
        i_center = np.argmin(np.abs(scan.relative_angles()))
        assert center[i_center] == 3.0  # west face is 3 m straight ahead
        center[i_center] = 2.75
        shifted = LidarScan(stamp=0.0, pose_at_scan=ROBOT, ranges=center,
                            params=scan.params)
        update_local(local_cm, window, shifted, ROBOT)
        marks = local_cm.marked_cells()
        assert (OBSTACLE[0] - 1, OBSTACLE[1]) not in marks
        assert OBSTACLE in marks

    def test_unswept_mark_neither_decays_nor_clears(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        # Face away: the obstacle cell sits in the 90 degree blind cone.
        behind = Pose2D(ROBOT.x, ROBOT.y, math.pi)
        update_local(local_cm, window, scan_room(behind, 1.0), behind)
        assert local_cm.marked_cells() == {OBSTACLE: 3}
        ix, iy = OBSTACLE
        assert local_cm.cost[iy, ix] == LETHAL

    def test_moving_window_drops_remote_marks(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        update_local(local_cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        far = Pose2D(13.0, 13.0, 0.0)
        update_local(local_cm, window, scan_room(far, 1.0), far)
        assert local_cm.marked_cells() == {}
        assert np.array_equal(local_cm.cost, local_cm.static_cost)

    def test_robot_cell_never_marked(self, local_cm):
        window = LocalWindow(side=8.0, persistence=3)
        params = LidarParams(fov=90.0, angular_resolution=45.0,
                             noise_sigma=0.0)
        pose = Pose2D(8.25, 8.25, 0.0)
        ranges = np.array([0.1, 0.15, np.inf])
        scan = LidarScan(stamp=0.0, pose_at_scan=pose, ranges=ranges,
                         params=params)
        update_local(local_cm, window, scan, pose)
        assert local_cm.marked_cells() == {}

    def test_static_lethal_endpoints_not_remarked(self, local_cm):
        # Scanning near a wall: every wall-face endpoint floors into the
        # wall cell itself, already lethal in the static layer.
        window = LocalWindow(side=8.0, persistence=3)
        pose = Pose2D(12.0, 8.25, 0.0)  # east wall 2.5 m ahead
        update_local(local_cm, window, scan_room(pose, 0.0), pose)
        assert local_cm.marked_cells() == {}

    def test_unknown_static_cells_take_no_marks(self):
        # Unknown reads 255, above lethal, so planners already avoid the
        # cell; an endpoint there must not open mark bookkeeping for it.
        rows = list(bordered_room(28, 28))
        iy_top = len(rows) - 1 - OBSTACLE[1]  # rows are top-first
        rows[iy_top] = (rows[iy_top][:OBSTACLE[0]] + "?"
                        + rows[iy_top][OBSTACLE[0] + 1:])
        grid, _ = make_world(rows)
        cm = build_static_costmap(grid, inscribed_radius=0.22)
        window = LocalWindow(side=8.0, persistence=3)
        update_local(cm, window, scan_room(ROBOT, 0.0, [OBSTACLE]), ROBOT)
        ix, iy = OBSTACLE
        assert cm.marked_cells() == {}
        assert cm.cost[iy, ix] == UNKNOWN_COST


class TestExportPgm:
    def test_header_and_row_order(self):
        grid, _ = make_world(["#.",
                              ".?"])
        cm = build_static_costmap(grid, 0.22)
        assert export_pgm(cm) == "P2\n2 2\n255\n254 15\n15 255\n"
