"""Dynamic window local planner.

One control cycle samples the velocity window reachable under acceleration
limits, forward-simulates each candidate twist over a short horizon with the
shared Euler model, and scores the feasible rollouts with four terms:

    S_path      negated distance from the rollout endpoint to the global path
    S_goal      negated distance from the rollout endpoint to the goal
    S_obstacle  worst clearance margin along the rollout, (253 - cost) / 253
    S_velocity  forward speed, v / max_v

Each term is min-max normalized across the feasible set (a degenerate term
with equal min and max contributes 0 for every sample) and combined with the
configured weights. Ties keep the lowest sample index; samples enumerate v
first, then omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .costmap import INSCRIBED, LETHAL, Costmap, cost_at
from .geometry import nearest_on_polyline
from .global_planner import Path
from .kinematics import Pose2D, RobotParams, Twist, rollout


class DwaBlocked(RuntimeError):
    """Every sampled command collides within the horizon."""


@dataclass(frozen=True)
class VelocityWindow:
    """Reachable twist box for one control period."""

    v_min: float
    v_max: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if self.v_min > self.v_max or self.omega_min > self.omega_max:
            raise ValueError("empty velocity window")

    def contains(self, cmd: Twist, tol: float = 1e-12) -> bool:
        return (self.v_min - tol <= cmd.v <= self.v_max + tol
                and self.omega_min - tol <= cmd.omega <= self.omega_max + tol)


@dataclass
class DwaConfig:
    nv: int = 11
    nomega: int = 21
    horizon: float = 2.0
    sim_dt: float = 0.1
    w_path: float = 0.8
    w_goal: float = 0.6
    w_obstacle: float = 0.4
    w_velocity: float = 0.2

    def __post_init__(self):
        if self.nv < 2 or self.nomega < 2:
            raise ValueError("need at least 2 samples per axis")
        if self.horizon <= 0.0 or self.sim_dt <= 0.0:
            raise ValueError("horizon and sim_dt must be positive")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.horizon / self.sim_dt)))


@dataclass
class ScoredTrajectory:
    cmd: Twist
    poses: list[Pose2D]
    score: float
    feasible: bool
    index: int  # sample index, v-major


def dynamic_window(current: Twist, params: RobotParams, dt: float) -> VelocityWindow:
    """Twists reachable from `current` within dt, clipped to platform limits.

    Linear velocity never goes negative: the platform does not reverse.
    """
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    return VelocityWindow(
        v_min=max(0.0, current.v - params.accel_v * dt),
        v_max=min(params.max_v, current.v + params.accel_v * dt),
        omega_min=max(-params.max_omega, current.omega - params.accel_omega * dt),
        omega_max=min(params.max_omega, current.omega + params.accel_omega * dt),
    )


def _sample_twists(window: VelocityWindow, cfg: DwaConfig) -> list[Twist]:
    v_step = (window.v_max - window.v_min) / (cfg.nv - 1)
    o_step = (window.omega_max - window.omega_min) / (cfg.nomega - 1)
    out = []
    for iv in range(cfg.nv):
        v = window.v_min + iv * v_step
        for io in range(cfg.nomega):
            out.append(Twist(v, window.omega_min + io * o_step))
    return out


def evaluate(window: VelocityWindow, pose: Pose2D, goal: Pose2D, path: Path,
             costmap: Costmap, robot: RobotParams, cfg: DwaConfig) -> list[ScoredTrajectory]:
    """Score every sampled twist; returns feasible trajectories in sample order.

    A sample is infeasible when any rollout pose (including the start) lands on
    a cell with cost >= LETHAL; such samples are excluded from normalization
    and from the returned list.
    """
    if not path.waypoints:
        raise ValueError("evaluate needs a non-empty path")
    steps = cfg.steps
    raw: list[tuple[int, Twist, list[Pose2D], float, float, float, float]] = []
    for index, cmd in enumerate(_sample_twists(window, cfg)):
        poses = rollout(pose, cmd, cfg.sim_dt, steps)
        feasible = True
        margin = math.inf
        for p in poses:
            c = cost_at(costmap, (p.x, p.y))
            if c >= LETHAL:
                feasible = False
                break
            m = (INSCRIBED - c) / INSCRIBED
            if m < margin:
                margin = m
        if not feasible:
            continue
        end = poses[-1]
        s_path = -nearest_on_polyline(path.waypoints, end.x, end.y)[2]
        dxg = goal.x - end.x
        dyg = goal.y - end.y
        s_goal = -math.sqrt(dxg * dxg + dyg * dyg)
        s_vel = cmd.v / robot.max_v
        raw.append((index, cmd, poses, s_path, s_goal, margin, s_vel))

    if not raw:
        return []

    def normalized(values: list[float]) -> list[float]:
        lo = min(values)
        hi = max(values)
        if hi <= lo:
            return [0.0] * len(values)
        return [(v - lo) / (hi - lo) for v in values]

    n_path = normalized([r[3] for r in raw])
    n_goal = normalized([r[4] for r in raw])
    n_obs = normalized([r[5] for r in raw])
    n_vel = normalized([r[6] for r in raw])
    out = []
    for k, (index, cmd, poses, *_rest) in enumerate(raw):
        score = (cfg.w_path * n_path[k] + cfg.w_goal * n_goal[k]
                 + cfg.w_obstacle * n_obs[k] + cfg.w_velocity * n_vel[k])
        out.append(ScoredTrajectory(cmd=cmd, poses=poses, score=score,
                                    feasible=True, index=index))
    return out


def select_best(trajectories: list[ScoredTrajectory]) -> ScoredTrajectory:
    """Highest score wins; equal scores keep the earliest sample index."""
    if not trajectories:
        raise DwaBlocked("no feasible trajectory")
    best = trajectories[0]
    for t in trajectories[1:]:
        if t.score > best.score:
            best = t
    return best


def compute_cmd(window: VelocityWindow, pose: Pose2D, goal: Pose2D, path: Path,
                costmap: Costmap, robot: RobotParams, cfg: DwaConfig) -> Twist:
    """Best command for one control cycle; raises DwaBlocked when none is feasible."""
    return select_best(evaluate(window, pose, goal, path, costmap, robot, cfg)).cmd
