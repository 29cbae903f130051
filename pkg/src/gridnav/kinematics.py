"""Differential-drive motion model.

Discrete unicycle kinematics under explicit Euler integration: the pose is
advanced with the heading held at its value from the start of the step,

    x'     = x + v  * dt * cos(theta)
    y'     = y + v  * dt * sin(theta)
    theta' = theta + omega * dt

which keeps every downstream consumer (simulation truth, dead reckoning,
trajectory rollouts) on one shared integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    a = math.remainder(angle, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


@dataclass(frozen=True)
class Pose2D:
    """Planar pose in the map frame. theta is normalized to (-pi, pi] on construction."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def compose(self, local: "Pose2D") -> "Pose2D":
        """Express a pose given in this pose's frame in the map frame."""
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return Pose2D(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
            self.theta + local.theta,
        )

    def inverse(self) -> "Pose2D":
        """Pose of the map-frame origin as seen from this pose's frame."""
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return Pose2D(-(c * self.x + s * self.y), s * self.x - c * self.y, -self.theta)

    def distance_to(self, other: "Pose2D") -> float:
        dx = other.x - self.x
        dy = other.y - self.y
        return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class Twist:
    """Commanded body velocity: linear v along the heading, angular omega about z."""

    v: float = 0.0
    omega: float = 0.0


@dataclass
class RobotParams:
    """Physical limits and control period of the platform.

    Velocity and acceleration limits bound the reachable window searched by the
    local planner; radius feeds costmap inflation; dt is the control period the
    whole closed loop runs at.
    """

    max_v: float = 0.30
    max_omega: float = 0.20
    radius: float = 0.22
    wheel_radius: float = 0.03
    track_width: float = 0.30
    accel_v: float = 0.50
    accel_omega: float = 1.00
    dt: float = 0.1

    def __post_init__(self):
        for name in ("max_v", "max_omega", "radius", "wheel_radius", "track_width",
                     "accel_v", "accel_omega", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"RobotParams.{name} must be positive")

    def wheel_speeds(self, cmd: Twist) -> tuple[float, float]:
        """Left/right wheel angular rates (rad/s) realizing a body twist."""
        half = 0.5 * self.track_width
        return ((cmd.v - half * cmd.omega) / self.wheel_radius,
                (cmd.v + half * cmd.omega) / self.wheel_radius)


def step(pose: Pose2D, cmd: Twist, dt: float) -> Pose2D:
    """Advance a pose by one Euler step of duration dt under a constant twist."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return Pose2D(
        pose.x + cmd.v * dt * math.cos(pose.theta),
        pose.y + cmd.v * dt * math.sin(pose.theta),
        pose.theta + cmd.omega * dt,
    )


def rollout(pose: Pose2D, cmd: Twist, dt: float, steps: int) -> list[Pose2D]:
    """Forward-simulate a constant twist; returns steps+1 poses starting at `pose`."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    out = [pose]
    for _ in range(steps):
        pose = step(pose, cmd, dt)
        out.append(pose)
    return out


def dead_reckon(pose: Pose2D, cmd: Twist, dt: float,
                sigma_v: float, sigma_omega: float,
                rng: np.random.Generator) -> Pose2D:
    """One Euler step with Gaussian noise on the executed twist.

    Two normal draws are consumed per call (v then omega) regardless of sigma,
    so the generator stream advances identically whether or not noise is on;
    with both sigmas zero the result equals step() exactly.
    """
    noisy = Twist(cmd.v + sigma_v * rng.standard_normal(),
                  cmd.omega + sigma_omega * rng.standard_normal())
    return step(pose, noisy, dt)
