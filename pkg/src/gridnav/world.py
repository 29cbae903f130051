"""Static world model: occupancy grid, landmark map, map file parsing, LiDAR.

Map files are plain text: a header of `key value` lines followed by a `map:`
line and one ASCII row per grid row. The first body row is the top of the map
(maximum y); column 0 is minimum x. Cell characters:

    #   occupied
    .   free
    ?   unknown

Header keys: `resolution` (required, meters per cell), `origin` (x y theta of
the outer corner of cell (0,0), default 0 0 0), optional `width`/`height`
(validated against the body), and `landmark <id> <x> <y>` lines. `#` comments
and blank lines are allowed in the header only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _raytrace
from .kinematics import Pose2D

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

#: In-memory sentinel for a beam that returned nothing. Exports encode it as
#: the sensor's range_max; in arrays it is IEEE infinity.
NO_RETURN = math.inf

_CELL_CHARS = {"#": OCCUPIED, ".": FREE, "?": UNKNOWN}
_CHAR_FOR = {OCCUPIED: "#", FREE: ".", UNKNOWN: "?"}


class MapParseError(ValueError):
    """Malformed map document; carries 1-based line (and column when cell-level)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass
class OccupancyGrid:
    """Row-major occupancy grid; cells[iy, ix] with iy = 0 at minimum y."""

    width: int
    height: int
    resolution: float
    origin: Pose2D
    cells: np.ndarray

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if self.cells.shape != (self.height, self.width):
            raise ValueError("cells shape does not match width/height")

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def contains(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        return self.in_bounds(ix, iy)

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.origin.x) / self.resolution)),
                int(math.floor((y - self.origin.y) / self.resolution)))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin.x + (ix + 0.5) * self.resolution,
                self.origin.y + (iy + 0.5) * self.resolution)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.width, self.height, self.resolution,
                             self.origin, self.cells.copy())

    def to_text(self) -> str:
        """Serialize back to the map file body (header not included)."""
        rows = []
        for iy in range(self.height - 1, -1, -1):
            rows.append("".join(_CHAR_FOR[int(v)] for v in self.cells[iy]))
        return "\n".join(rows)


@dataclass(frozen=True)
class Landmark:
    id: int
    x: float
    y: float


@dataclass
class LandmarkMap:
    """Point landmarks with unique integer ids, kept sorted by id."""

    landmarks: tuple[Landmark, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.landmarks, key=lambda lm: lm.id))
        ids = [lm.id for lm in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate landmark id")
        self.landmarks = ordered
        self._by_id = {lm.id: lm for lm in ordered}

    def __len__(self) -> int:
        return len(self.landmarks)

    def __iter__(self):
        return iter(self.landmarks)

    def get(self, landmark_id: int) -> Landmark:
        return self._by_id[landmark_id]


@dataclass
class LidarParams:
    """Planar range scanner model; angles in degrees, ranges in meters."""

    fov: float = 270.0
    angular_resolution: float = 0.36
    range_min: float = 0.06
    range_max: float = 6.40
    rate: float = 10.0
    noise_sigma: float = 0.01

    def __post_init__(self):
        if self.fov <= 0.0 or self.angular_resolution <= 0.0:
            raise ValueError("fov and angular_resolution must be positive")
        if not (0.0 <= self.range_min < self.range_max):
            raise ValueError("require 0 <= range_min < range_max")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def beam_count(self) -> int:
        # Small epsilon so an exact integer quotient is not floored away by
        # the binary representation of the degree values.
        return int(math.floor(self.fov / self.angular_resolution + 1e-9)) + 1

    @property
    def fov_rad(self) -> float:
        return math.radians(self.fov)

    @property
    def angular_step_rad(self) -> float:
        return math.radians(self.angular_resolution)


@dataclass
class LidarScan:
    """One sweep: ranges[i] belongs to beam angle heading - fov/2 + i*step."""

    stamp: float
    pose_at_scan: Pose2D
    ranges: np.ndarray
    params: LidarParams

    def relative_angles(self) -> np.ndarray:
        """Beam angles relative to the scanning pose's heading."""
        n = len(self.ranges)
        return -self.params.fov_rad / 2.0 + np.arange(n) * self.params.angular_step_rad


def parse_world(text: str) -> tuple[OccupancyGrid, LandmarkMap]:
    """Parse a map document; raises MapParseError with line/column on bad input."""
    lines = text.split("\n")
    resolution: float | None = None
    origin = Pose2D(0.0, 0.0, 0.0)
    declared_width: int | None = None
    declared_height: int | None = None
    landmarks: list[Landmark] = []
    seen_ids: set[int] = set()
    body_start: int | None = None

    def fail(msg: str, line_no: int, col: int | None = None):
        raise MapParseError(msg, line_no, col)

    for idx, raw in enumerate(lines):
        line_no = idx + 1
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "map:":
            body_start = idx + 1
            break
        parts = line.split()
        key = parts[0]
        try:
            if key == "resolution":
                if len(parts) != 2:
                    fail("resolution takes one value", line_no)
                resolution = float(parts[1])
                if resolution <= 0.0:
                    fail("resolution must be positive", line_no)
            elif key == "origin":
                if len(parts) != 4:
                    fail("origin takes x y theta", line_no)
                theta = float(parts[3])
                if theta != 0.0:
                    fail("rotated map origins are not supported (theta must be 0)", line_no)
                origin = Pose2D(float(parts[1]), float(parts[2]), 0.0)
            elif key == "width":
                declared_width = int(parts[1])
            elif key == "height":
                declared_height = int(parts[1])
            elif key == "landmark":
                if len(parts) != 4:
                    fail("landmark takes id x y", line_no)
                lm_id = int(parts[1])
                if lm_id in seen_ids:
                    fail(f"duplicate landmark id {lm_id}", line_no)
                seen_ids.add(lm_id)
                landmarks.append(Landmark(lm_id, float(parts[2]), float(parts[3])))
            else:
                fail(f"unknown header key {key!r}", line_no)
        except ValueError as exc:
            if isinstance(exc, MapParseError):
                raise
            fail(f"bad value in {key!r} header: {exc}", line_no)

    if resolution is None:
        raise MapParseError("missing required 'resolution' header")
    if body_start is None:
        raise MapParseError("missing 'map:' body marker")

    rows: list[list[int]] = []
    width: int | None = declared_width
    for idx in range(body_start, len(lines)):
        line_no = idx + 1
        raw = lines[idx].rstrip("\r")
        if raw == "":
            # Tolerate trailing blank lines; blanks between rows are malformed.
            if any(lines[j].strip() for j in range(idx + 1, len(lines))):
                fail("blank line inside map body", line_no)
            break
        if width is None:
            width = len(raw)
        elif len(raw) != width:
            fail(f"row width {len(raw)} does not match expected {width}", line_no)
        row = []
        for col, ch in enumerate(raw):
            state = _CELL_CHARS.get(ch)
            if state is None:
                fail(f"unknown map character {ch!r}", line_no, col + 1)
            row.append(state)
        rows.append(row)

    if not rows:
        raise MapParseError("map body is empty")
    if declared_height is not None and declared_height != len(rows):
        raise MapParseError(
            f"body has {len(rows)} rows but height header says {declared_height}")

    height = len(rows)
    cells = np.empty((height, width), dtype=np.uint8)
    for r, row in enumerate(rows):
        cells[height - 1 - r, :] = row  # first body row is the top of the map
    grid = OccupancyGrid(width, height, resolution, origin, cells)
    return grid, LandmarkMap(tuple(landmarks))


def load_world(path: str) -> tuple[OccupancyGrid, LandmarkMap]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_world(fh.read())


def raycast(grid: OccupancyGrid, origin: tuple[float, float], angle: float,
            range_max: float) -> float:
    """Distance from origin to the first OCCUPIED cell boundary along `angle`.

    UNKNOWN cells do not block. Returns NO_RETURN when nothing is hit within
    range_max (leaving the grid counts as no return). The origin must lie
    inside the grid.
    """
    t = _raytrace.raycast_kernel(grid.cells, OCCUPIED, origin[0], origin[1],
                                 angle, range_max,
                                 grid.origin.x, grid.origin.y, grid.resolution)
    if t == -2.0:
        raise ValueError("raycast origin outside the grid")
    return NO_RETURN if t < 0.0 else t


def simulate_scan(grid: OccupancyGrid, true_pose: Pose2D, params: LidarParams,
                  rng: np.random.Generator, stamp: float = 0.0) -> LidarScan:
    """Simulate one LiDAR sweep from a pose.

    Each beam is a raycast plus one Gaussian range-noise draw. Noisy returns
    are clamped to range_max above; values falling below range_min become
    NO_RETURN, as do beams that hit nothing within range_max.
    """
    if not grid.contains(true_pose.x, true_pose.y):
        raise ValueError("scan pose outside the grid")
    n = params.beam_count
    hits = np.empty(n, dtype=np.float64)
    _raytrace.scan_kernel(grid.cells, OCCUPIED, true_pose.x, true_pose.y,
                          true_pose.theta, params.fov_rad, params.angular_step_rad,
                          n, params.range_max,
                          grid.origin.x, grid.origin.y, grid.resolution, hits)
    noise = rng.normal(0.0, params.noise_sigma, n)
    ranges = np.where(hits >= 0.0, hits + noise, np.inf)
    ranges[ranges < params.range_min] = np.inf
    finite = np.isfinite(ranges)
    ranges[finite] = np.minimum(ranges[finite], params.range_max)
    return LidarScan(stamp=stamp, pose_at_scan=true_pose, ranges=ranges, params=params)


def disc_cells(grid: OccupancyGrid, center: tuple[float, float], radius: float) -> list[tuple[int, int]]:
    """In-bounds cells whose center lies within `radius` of a world point."""
    if radius < 0.0:
        raise ValueError("radius must be non-negative")
    cx, cy = center
    res = grid.resolution
    ix0 = int(math.floor((cx - radius - grid.origin.x) / res))
    ix1 = int(math.floor((cx + radius - grid.origin.x) / res))
    iy0 = int(math.floor((cy - radius - grid.origin.y) / res))
    iy1 = int(math.floor((cy + radius - grid.origin.y) / res))
    out = []
    r2 = radius * radius
    for iy in range(max(0, iy0), min(grid.height, iy1 + 1)):
        for ix in range(max(0, ix0), min(grid.width, ix1 + 1)):
            px, py = grid.cell_center(ix, iy)
            dx = px - cx
            dy = py - cy
            if dx * dx + dy * dy <= r2:
                out.append((ix, iy))
    return out
