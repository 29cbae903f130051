"""Scenario files, parameter overrides and the navigation run log.

A scenario is a plain-text key-value file:

    map corridor.map          # path, relative to the scenario file
    start -4.0 3.0 0.0
    goal 0.2 -3.0
    seed 42
    duration 120
    set dwa.nv 15             # any number of dotted parameter overrides

Sections reachable through `set`: robot, lidar, camera, dwa, costmap, nav,
localization, sim. Field names and types come from the parameter dataclasses.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

from .global_planner import Path
from .kinematics import Pose2D, RobotParams, Twist
from .local_planner import DwaConfig
from .localization import CameraParams
from .world import LidarParams


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class CostmapParams:
    inflation_radius: float = 0.55
    decay: float = 10.0
    window_side: float = 4.0
    persistence: int = 3


@dataclass
class NavParams:
    goal_tolerance_xy: float = 0.20
    replan_period: float = 5.0
    recovery_duration: float = 2.0
    plan_cost_weight: float = 3.0


@dataclass
class LocalizationParams:
    min_landmarks: int = 3


@dataclass
class SimParams:
    """Noise injected between the commanded and the executed twist."""

    actuation_sigma_v: float = 0.01
    actuation_sigma_omega: float = 0.01


@dataclass
class ScenarioConfig:
    map_path: str
    start: Pose2D
    goal: tuple[float, float]
    seed: int = 0
    duration: float = 120.0
    robot: RobotParams = field(default_factory=RobotParams)
    lidar: LidarParams = field(default_factory=LidarParams)
    camera: CameraParams = field(default_factory=CameraParams)
    dwa: DwaConfig = field(default_factory=DwaConfig)
    costmap: CostmapParams = field(default_factory=CostmapParams)
    nav: NavParams = field(default_factory=NavParams)
    localization: LocalizationParams = field(default_factory=LocalizationParams)
    sim: SimParams = field(default_factory=SimParams)

    def section(self, name: str):
        if name not in ("robot", "lidar", "camera", "dwa", "costmap", "nav",
                        "localization", "sim"):
            raise KeyError(name)
        return getattr(self, name)


def apply_override(cfg: ScenarioConfig, dotted: str, raw: str,
                   line: int | None = None) -> None:
    """Set one `section.field` parameter from its text representation."""
    parts = dotted.split(".")
    if len(parts) != 2:
        raise ScenarioError(f"override path must be section.field, got {dotted!r}", line)
    sec_name, field_name = parts
    try:
        section = cfg.section(sec_name)
    except KeyError:
        raise ScenarioError(f"unknown parameter section {sec_name!r}", line)
    fields = {f.name: f for f in dataclasses.fields(section)}
    if field_name not in fields:
        raise ScenarioError(f"unknown parameter {dotted!r}", line)
    current = getattr(section, field_name)
    try:
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        elif isinstance(current, Pose2D):
            xs = raw.split(",")
            if len(xs) != 3:
                raise ValueError("expected x,y,theta")
            value = Pose2D(float(xs[0]), float(xs[1]), float(xs[2]))
        else:
            raise ValueError(f"field type {type(current).__name__} not settable")
    except ValueError as exc:
        raise ScenarioError(f"bad value for {dotted!r}: {exc}", line)
    previous = getattr(section, field_name)
    setattr(section, field_name, value)
    # Re-run the dataclass validation against the mutated value set.
    post = getattr(section, "__post_init__", None)
    if post is not None:
        try:
            post()
        except ValueError as exc:
            setattr(section, field_name, previous)
            raise ScenarioError(f"bad value for {dotted!r}: {exc}", line)


def parse_scenario(text: str, base_dir: str = ".") -> ScenarioConfig:
    map_path: str | None = None
    start: Pose2D | None = None
    goal: tuple[float, float] | None = None
    seed = 0
    duration = 120.0
    overrides: list[tuple[str, str, int]] = []

    for idx, raw in enumerate(text.split("\n")):
        line_no = idx + 1
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        try:
            if key == "map":
                if len(parts) != 2:
                    raise ScenarioError("map takes one path", line_no)
                map_path = os.path.normpath(os.path.join(base_dir, parts[1]))
            elif key == "start":
                if len(parts) not in (3, 4):
                    raise ScenarioError("start takes x y [theta]", line_no)
                theta = float(parts[3]) if len(parts) == 4 else 0.0
                start = Pose2D(float(parts[1]), float(parts[2]), theta)
            elif key == "goal":
                if len(parts) != 3:
                    raise ScenarioError("goal takes x y", line_no)
                goal = (float(parts[1]), float(parts[2]))
            elif key == "seed":
                seed = int(parts[1])
            elif key == "duration":
                duration = float(parts[1])
                if duration <= 0.0:
                    raise ScenarioError("duration must be positive", line_no)
            elif key == "set":
                if len(parts) != 3:
                    raise ScenarioError("set takes parameter value", line_no)
                overrides.append((parts[1], parts[2], line_no))
            else:
                raise ScenarioError(f"unknown scenario key {key!r}", line_no)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"bad {key!r} line: {exc}", line_no)

    if map_path is None:
        raise ScenarioError("missing required 'map' entry")
    if start is None:
        raise ScenarioError("missing required 'start' entry")
    if goal is None:
        raise ScenarioError("missing required 'goal' entry")
    cfg = ScenarioConfig(map_path=map_path, start=start, goal=goal,
                         seed=seed, duration=duration)
    for dotted, raw_value, line_no in overrides:
        apply_override(cfg, dotted, raw_value, line_no)
    return cfg


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass
class TickRecord:
    t: float
    true_pose: Pose2D
    est_pose: Pose2D
    cmd: Twist
    mode: str


@dataclass
class NavigationLog:
    """Everything one closed-loop run produced, in tick order."""

    records: list[TickRecord] = field(default_factory=list)
    paths: list[tuple[float, Path]] = field(default_factory=list)
    events: list[tuple[float, str]] = field(default_factory=list)
    result: str = "TIMEOUT"
    failure_reason: str | None = None
    seed: int = 0
    wall_time: float = 0.0

    def reference_path(self) -> Path | None:
        """The first accepted global plan; tracking error is measured against it."""
        return self.paths[0][1] if self.paths else None

    def to_csv(self) -> str:
        lines = ["t,true_x,true_y,true_theta,est_x,est_y,est_theta,v,omega,state"]
        for r in self.records:
            lines.append(",".join((
                repr(r.t),
                repr(r.true_pose.x), repr(r.true_pose.y), repr(r.true_pose.theta),
                repr(r.est_pose.x), repr(r.est_pose.y), repr(r.est_pose.theta),
                repr(r.cmd.v), repr(r.cmd.omega), r.mode,
            )))
        return "\n".join(lines) + "\n"
