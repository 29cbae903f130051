"""Map parsing, raycasting and scan simulation.

Raycast correctness is checked against a brute-force marching oracle that
samples the ray at a fraction of the cell size, plus hand-computable axial
and diagonal cases with exact expected distances.
"""
import math
import os

import numpy as np
import pytest

from conftest import bordered_room, make_world, random_occupancy, world_text
from gridnav.kinematics import Pose2D
from gridnav.world import (FREE, NO_RETURN, OCCUPIED, UNKNOWN, LandmarkMap,
                           Landmark, LidarParams, MapParseError, OccupancyGrid,
                           disc_cells, parse_world, raycast, simulate_scan)


def exhaustive_raycast(grid, origin, angle, range_max):
    """Exact oracle: minimum slab-test entry over every occupied cell box."""
    ox, oy = origin
    ux = math.cos(angle)
    uy = math.sin(angle)
    res = grid.resolution
    best = math.inf
    for iy in range(grid.height):
        for ix in range(grid.width):
            if grid.cells[iy, ix] != OCCUPIED:
                continue
            x0 = grid.origin.x + ix * res
            y0 = grid.origin.y + iy * res
            t0, t1 = 0.0, math.inf
            hit = True
            for o, u, lo, hi in ((ox, ux, x0, x0 + res),
                                 (oy, uy, y0, y0 + res)):
                if u == 0.0:
                    if not lo <= o <= hi:
                        hit = False
                        break
                    continue
                ta = (lo - o) / u
                tb = (hi - o) / u
                if ta > tb:
                    ta, tb = tb, ta
                t0 = max(t0, ta)
                t1 = min(t1, tb)
            if hit and t0 <= t1 and t0 < best:
                best = t0
    return best if best <= range_max else math.inf


class TestParsing:
    def test_roundtrip_and_row_order(self):
        rows = ["##?",
                "...",
                "#.#"]
        grid, _ = make_world(rows, resolution=1.0)
        assert (grid.width, grid.height) == (3, 3)
        # First body row is the top of the map: maximum iy.
        assert grid.cells[2, 0] == OCCUPIED
        assert grid.cells[2, 2] == UNKNOWN
        assert grid.cells[1, 1] == FREE
        assert grid.cells[0, 1] == FREE
        assert grid.to_text() == "\n".join(rows)

    def test_landmarks_sorted_by_id(self):
        _, landmarks = make_world(["."], landmarks=[(5, 1.0, 2.0), (2, 0.0, 0.0)])
        assert [lm.id for lm in landmarks] == [2, 5]
        assert landmarks.get(5).x == 1.0

    def test_origin_offsets_world_frame(self):
        grid, _ = make_world(["."], resolution=2.0, origin=(-4.0, 3.0))
        assert grid.cell_center(0, 0) == (-3.0, 4.0)
        assert grid.world_to_cell(-3.9, 3.1) == (0, 0)

    def test_header_comments_and_blanks_allowed(self):
        text = "# floor plan\n\nresolution 1\n# another note\nmap:\n..\n"
        grid, _ = parse_world(text)
        assert (grid.width, grid.height) == (2, 1)

    def test_declared_dimensions_validated(self):
        good = world_text(["..", ".."], extra_header=["width 2", "height 2"])
        parse_world(good)
        bad = world_text(["..", ".."], extra_header=["width 3"])
        with pytest.raises(MapParseError, match="width"):
            parse_world(bad)

    def test_trailing_blank_lines_tolerated(self):
        grid, _ = parse_world("resolution 1\nmap:\n..\n\n\n")
        assert grid.width == 2

    def test_blank_line_inside_body_rejected(self):
        with pytest.raises(MapParseError, match="blank line"):
            parse_world("resolution 1\nmap:\n..\n\n..\n")

    def test_unknown_character_reports_line_and_column(self):
        with pytest.raises(MapParseError) as err:
            parse_world("resolution 1\nmap:\n.x\n")
        assert err.value.line == 3
        assert err.value.column == 2

    def test_ragged_row_reports_line(self):
        with pytest.raises(MapParseError) as err:
            parse_world("resolution 1\nmap:\n...\n..\n")
        assert err.value.line == 4

    def test_rotated_origin_rejected(self):
        with pytest.raises(MapParseError, match="rotated"):
            parse_world("resolution 1\norigin 0 0 1.5\nmap:\n.\n")

    def test_duplicate_landmark_rejected(self):
        text = "resolution 1\nlandmark 1 0 0\nlandmark 1 2 2\nmap:\n.\n"
        with pytest.raises(MapParseError, match="duplicate"):
            parse_world(text)

    @pytest.mark.parametrize("text, fragment", [
        ("map:\n.\n", "resolution"),
        ("resolution 1\n", "map:"),
        ("resolution 0\nmap:\n.\n", "positive"),
        ("resolution 1\nwat 3\nmap:\n.\n", "unknown header"),
        ("resolution 1\nlandmark 1 0\nmap:\n.\n", "landmark"),
        ("resolution one\nmap:\n.\n", "bad value"),
    ])
    def test_malformed_documents(self, text, fragment):
        with pytest.raises(MapParseError, match=fragment):
            parse_world(text)

    def test_landmark_map_rejects_duplicates_directly(self):
        with pytest.raises(ValueError, match="duplicate"):
            LandmarkMap((Landmark(1, 0, 0), Landmark(1, 1, 1)))


class TestGridAccessors:
    def test_world_to_cell_floor_semantics(self):
        grid, _ = make_world(["..", ".."], resolution=0.5)
        assert grid.world_to_cell(0.0, 0.0) == (0, 0)
        assert grid.world_to_cell(0.49999, 0.0) == (0, 0)
        assert grid.world_to_cell(0.5, 0.5) == (1, 1)
        assert grid.world_to_cell(-0.01, 0.0) == (-1, 0)

    def test_copy_is_detached(self):
        grid, _ = make_world(["."])
        clone = grid.copy()
        clone.cells[0, 0] = OCCUPIED
        assert grid.cells[0, 0] == FREE

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            OccupancyGrid(2, 2, 1.0, Pose2D(), np.zeros((1, 2), dtype=np.uint8))


class TestLidarParams:
    def test_beam_count_includes_both_edges(self):
        assert LidarParams(fov=270.0, angular_resolution=0.36).beam_count == 751
        assert LidarParams(fov=180.0, angular_resolution=1.0).beam_count == 181
        assert LidarParams(fov=90.0, angular_resolution=30.0).beam_count == 4

    def test_relative_angles_span_the_fov(self):
        params = LidarParams(fov=270.0, angular_resolution=0.36)
        rng = np.random.default_rng(0)
        grid, _ = make_world(bordered_room(8, 8))
        scan = simulate_scan(grid, Pose2D(2.0, 2.0, 0.0), params, rng)
        rel = scan.relative_angles()
        assert len(rel) == 751
        assert rel[0] == -params.fov_rad / 2.0
        assert rel[-1] == pytest.approx(params.fov_rad / 2.0, abs=1e-9)
        assert np.all(np.diff(rel) > 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            LidarParams(fov=0.0)
        with pytest.raises(ValueError):
            LidarParams(range_min=2.0, range_max=1.0)
        with pytest.raises(ValueError):
            LidarParams(noise_sigma=-0.1)


class TestRaycast:
    def test_axial_distance_exact(self):
        # Wall column at ix=3 of a 1 m grid: front face at x = 3.
        grid, _ = make_world(["...#.",
                              "...#.",
                              "...#."], resolution=1.0)
        assert raycast(grid, (0.5, 1.5), 0.0, 10.0) == 2.5

    def test_diagonal_distance(self):
        rows = ["....#",
                ".....",
                ".....",
                ".....",
                "....."]
        grid, _ = make_world(rows, resolution=1.0)
        d = raycast(grid, (0.5, 0.5), math.pi / 4.0, 10.0)
        assert d == pytest.approx(3.5 * math.sqrt(2.0), abs=1e-12)

    def test_unknown_does_not_block(self):
        grid, _ = make_world(["..?..",
                              "..?..",
                              "..?.."], resolution=1.0)
        assert raycast(grid, (0.5, 1.5), 0.0, 20.0) == NO_RETURN

    def test_range_limit_and_grid_exit(self):
        grid, _ = make_world(["....#"], resolution=1.0)
        assert raycast(grid, (0.5, 0.5), 0.0, 2.0) == NO_RETURN  # hit at 3.5
        assert raycast(grid, (0.5, 0.5), math.pi, 20.0) == NO_RETURN  # leaves

    def test_origin_outside_raises(self):
        grid, _ = make_world(["."], resolution=1.0)
        with pytest.raises(ValueError, match="origin"):
            raycast(grid, (5.0, 0.5), 0.0, 1.0)

    def test_matches_marching_oracle_on_random_worlds(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            cells = random_occupancy(rng, 12, 10, p_occupied=0.25)
            cells[5, 6] = FREE  # keep the origin cell open
            grid = OccupancyGrid(12, 10, 0.5, Pose2D(), cells)
            origin = grid.cell_center(6, 5)
            for _ in range(10):
                angle = rng.uniform(-math.pi, math.pi)
                got = raycast(grid, origin, angle, 8.0)
                expect = exhaustive_raycast(grid, origin, angle, 8.0)
                if math.isinf(expect):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(expect, abs=1e-9)


class TestSimulateScan:
    def test_deterministic_for_a_seed(self):
        grid, _ = make_world(bordered_room(8, 8))
        pose = Pose2D(2.0, 2.0, 0.3)
        a = simulate_scan(grid, pose, LidarParams(), np.random.default_rng(5))
        b = simulate_scan(grid, pose, LidarParams(), np.random.default_rng(5))
        assert np.array_equal(a.ranges, b.ranges)

    def test_zero_noise_equals_per_beam_raycast(self):
        grid, _ = make_world(bordered_room(8, 8))
        pose = Pose2D(2.0, 2.5, 0.7)
        params = LidarParams(fov=180.0, angular_resolution=2.0, noise_sigma=0.0)
        scan = simulate_scan(grid, pose, params, np.random.default_rng(0))
        for i in range(params.beam_count):
            # Beam i points at heading - fov/2 + i*step.
            angle = pose.theta - params.fov_rad / 2.0 + i * params.angular_step_rad
            expect = raycast(grid, (pose.x, pose.y), angle, params.range_max)
            if math.isinf(expect):
                assert math.isinf(scan.ranges[i])
            else:
                assert scan.ranges[i] == expect

    def test_short_returns_become_no_return(self):
        grid, _ = make_world(["#.#"], resolution=0.2)
        # Standing 0.05 m from the east wall face: closer than range_min.
        pose = Pose2D(0.35, 0.1, 0.0)
        params = LidarParams(fov=10.0, angular_resolution=10.0,
                             range_min=0.06, noise_sigma=0.0)
        scan = simulate_scan(grid, pose, params, np.random.default_rng(0))
        assert np.all(np.isinf(scan.ranges))

    def test_finite_returns_clamped_to_range_max(self):
        grid, _ = make_world(bordered_room(8, 8))
        params = LidarParams(noise_sigma=0.5)  # big noise to force clamping
        scan = simulate_scan(grid, Pose2D(2.5, 2.5, 0.0), params,
                             np.random.default_rng(11))
        finite = scan.ranges[np.isfinite(scan.ranges)]
        assert finite.max() <= params.range_max
        assert finite.min() >= params.range_min

    def test_pose_outside_grid_rejected(self):
        grid, _ = make_world(["."])
        with pytest.raises(ValueError):
            simulate_scan(grid, Pose2D(9.0, 9.0, 0.0), LidarParams(),
                          np.random.default_rng(0))


class TestDiscCells:
    def test_matches_brute_force(self):
        grid, _ = make_world(bordered_room(8, 8))
        for center, radius in [((2.0, 2.0), 0.7), ((0.3, 0.3), 1.0),
                               ((4.9, 2.5), 0.25), ((2.5, 2.5), 0.0)]:
            expect = []
            for iy in range(grid.height):
                for ix in range(grid.width):
                    px, py = grid.cell_center(ix, iy)
                    if (px - center[0]) ** 2 + (py - center[1]) ** 2 <= radius ** 2:
                        expect.append((ix, iy))
            assert disc_cells(grid, center, radius) == expect

    def test_negative_radius_rejected(self):
        grid, _ = make_world(["."])
        with pytest.raises(ValueError):
            disc_cells(grid, (0.0, 0.0), -0.1)


class TestShippedRoom:
    """The checked-in room fixture stays consistent with its own text."""

    @pytest.fixture(scope="class")
    @staticmethod
    def room():
        path = os.path.join(os.path.dirname(__file__), "..", "maps",
                            "ab_room.map")
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        return parse_world(text), text

    def test_occupied_count_equals_hash_characters(self, room):
        (grid, _), text = room
        body = text.split("map:\n", 1)[1]
        assert int((grid.cells == OCCUPIED).sum()) == body.count("#")
        assert int((grid.cells == UNKNOWN).sum()) == body.count("?")

    def test_dimensions_and_origin(self, room):
        (grid, landmarks), _ = room
        assert (grid.width, grid.height) == (120, 100)
        assert grid.resolution == 0.1
        assert (grid.origin.x, grid.origin.y) == (-6.0, -5.0)
        assert len(landmarks) == 16

    def test_point_inside_furniture_is_lethal_after_inflation(self, room):
        from gridnav.costmap import LETHAL, build_static_costmap, cost_at
        (grid, _), _ = room
        cm = build_static_costmap(grid, inscribed_radius=0.22)
        assert cost_at(cm, (-3.9, 0.0)) == LETHAL   # central block interior
        assert cost_at(cm, (5.0, 4.0)) == LETHAL    # corner desk
        assert cost_at(cm, (0.0, 0.0)) < LETHAL     # open floor
