"""Landmark-based pose estimation.

The camera reports bearing-range observations of point landmarks inside its
field of view. Pose correction solves the weighted nonlinear least squares

    r_i = [ (range_i - range(p, lm_i)) / sigma_range,
            wrap(bearing_i - bearing(p, lm_i)) / sigma_bearing ]

over the camera pose p with damped Gauss-Newton (step halving on residual
growth). The optimized camera pose is mapped back through the mounting
extrinsic to the robot body. With too few landmarks, or when the solve
diverges, the estimate falls back to the motion-model prior and is flagged
DEAD_RECKONING.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .kinematics import Pose2D, Twist, step, wrap_angle
from .world import OccupancyGrid, LandmarkMap, raycast

MAX_ITERATIONS = 25
STEP_TOLERANCE = 1e-6
MAX_HALVINGS = 5
DIVERGENCE_STREAK = 5


class Source(enum.Enum):
    VISUAL = "VISUAL"
    DEAD_RECKONING = "DEAD_RECKONING"


@dataclass
class CameraParams:
    """Forward-facing bearing-range sensor; fov in degrees, ranges in meters."""

    fov: float = 90.0
    range_min: float = 0.02
    range_max: float = 20.0
    rate: float = 30.0
    bearing_sigma: float = 0.01
    range_sigma: float = 0.05
    extrinsic: Pose2D = Pose2D(0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (0.0 < self.fov <= 360.0):
            raise ValueError("fov must be in (0, 360] degrees")
        if not (0.0 <= self.range_min < self.range_max):
            raise ValueError("require 0 <= range_min < range_max")
        if self.bearing_sigma <= 0.0 or self.range_sigma <= 0.0:
            raise ValueError("sigmas must be positive")

    @property
    def half_fov_rad(self) -> float:
        return math.radians(self.fov) / 2.0


@dataclass(frozen=True)
class Observation:
    landmark_id: int
    bearing: float  # rad, relative to the camera axis
    range: float    # m
    stamp: float


@dataclass(frozen=True)
class PoseEstimate:
    pose: Pose2D
    residual_rms: float  # weighted residual RMS at the solution; inf without a fit
    source: Source
    stamp: float


def observe(true_pose: Pose2D, landmarks: LandmarkMap, cam: CameraParams,
            rng: np.random.Generator, grid: OccupancyGrid | None = None,
            stamp: float = 0.0) -> list[Observation]:
    """Noisy bearing-range observations of the landmarks visible from a pose.

    A landmark is visible when its true range lies within [range_min,
    range_max], its true bearing within +-fov/2 of the camera axis, and (when a
    grid is given) the sight line is not blocked by an occupied cell. Two
    noise draws are consumed per visible landmark (bearing, then range); noisy
    values are clamped back into the sensor limits. Output is ordered by
    landmark id.
    """
    cam_pose = true_pose.compose(cam.extrinsic)
    out = []
    for lm in landmarks:
        dx = lm.x - cam_pose.x
        dy = lm.y - cam_pose.y
        r = math.sqrt(dx * dx + dy * dy)
        if r < cam.range_min or r > cam.range_max:
            continue
        bearing = wrap_angle(math.atan2(dy, dx) - cam_pose.theta)
        if abs(bearing) > cam.half_fov_rad:
            continue
        if grid is not None and r > 0.0:
            hit = raycast(grid, (cam_pose.x, cam_pose.y),
                          math.atan2(dy, dx), r)
            if hit < r:  # wall before the landmark
                continue
        b = bearing + cam.bearing_sigma * rng.standard_normal()
        rr = r + cam.range_sigma * rng.standard_normal()
        b = min(cam.half_fov_rad, max(-cam.half_fov_rad, b))
        rr = min(cam.range_max, max(cam.range_min, rr))
        out.append(Observation(lm.id, b, rr, stamp))
    return out


def _residuals(state: np.ndarray, obs: list[Observation], landmarks: LandmarkMap,
               cam: CameraParams) -> np.ndarray:
    x, y, theta = state
    r = np.empty(2 * len(obs))
    for i, ob in enumerate(obs):
        lm = landmarks.get(ob.landmark_id)
        dx = lm.x - x
        dy = lm.y - y
        dist = math.sqrt(dx * dx + dy * dy)
        pred_bearing = math.atan2(dy, dx) - theta
        r[2 * i] = (ob.range - dist) / cam.range_sigma
        r[2 * i + 1] = wrap_angle(ob.bearing - pred_bearing) / cam.bearing_sigma
    return r


def _jacobian(state: np.ndarray, obs: list[Observation], landmarks: LandmarkMap,
              cam: CameraParams) -> np.ndarray:
    """Jacobian of the residual vector with respect to (x, y, theta)."""
    x, y, _ = state
    J = np.zeros((2 * len(obs), 3))
    for i, ob in enumerate(obs):
        lm = landmarks.get(ob.landmark_id)
        dx = lm.x - x
        dy = lm.y - y
        q = dx * dx + dy * dy
        dist = math.sqrt(q)
        # residual_range = (z_r - dist)/sr: d(dist)/dx = -dx/dist
        J[2 * i, 0] = dx / dist / cam.range_sigma
        J[2 * i, 1] = dy / dist / cam.range_sigma
        # residual_bearing = wrap(z_b - atan2(dy,dx) + theta)/sb
        J[2 * i + 1, 0] = -dy / q / cam.bearing_sigma
        J[2 * i + 1, 1] = dx / q / cam.bearing_sigma
        J[2 * i + 1, 2] = 1.0 / cam.bearing_sigma
    return J


def estimate_pose(obs: list[Observation], landmarks: LandmarkMap, prior: Pose2D,
                  cam: CameraParams, min_landmarks: int = 3,
                  stamp: float = 0.0) -> PoseEstimate:
    """Correct a prior pose against one frame of observations.

    Needs at least `min_landmarks` observations to attempt the solve; otherwise
    the prior is passed through as DEAD_RECKONING. The same fallback fires when
    the residual norm grows for DIVERGENCE_STREAK consecutive iterations.
    """
    if len(obs) < min_landmarks:
        return PoseEstimate(prior, math.inf, Source.DEAD_RECKONING, stamp)

    cam_prior = prior.compose(cam.extrinsic)
    state = np.array([cam_prior.x, cam_prior.y, cam_prior.theta])
    res = _residuals(state, obs, landmarks, cam)
    cost = float(res @ res)
    growth_streak = 0

    for _ in range(MAX_ITERATIONS):
        J = _jacobian(state, obs, landmarks, cam)
        try:
            delta = np.linalg.solve(J.T @ J, -(J.T @ res))
        except np.linalg.LinAlgError:
            return PoseEstimate(prior, math.inf, Source.DEAD_RECKONING, stamp)
        if math.sqrt(float(delta @ delta)) < STEP_TOLERANCE:
            break
        scale = 1.0
        best = None
        for _ in range(MAX_HALVINGS + 1):
            cand = state + scale * delta
            cand_res = _residuals(cand, obs, landmarks, cam)
            cand_cost = float(cand_res @ cand_res)
            if cand_cost <= cost:
                best = (cand, cand_res, cand_cost)
                break
            scale *= 0.5
        if best is None:
            # Full step even though the residual grew; track divergence.
            cand = state + delta
            cand_res = _residuals(cand, obs, landmarks, cam)
            cand_cost = float(cand_res @ cand_res)
            growth_streak += 1
            if growth_streak >= DIVERGENCE_STREAK:
                return PoseEstimate(prior, math.inf, Source.DEAD_RECKONING, stamp)
            state, res, cost = cand, cand_res, cand_cost
        else:
            growth_streak = 0
            state, res, cost = best

    cam_pose = Pose2D(float(state[0]), float(state[1]), float(state[2]))
    body = cam_pose.compose(cam.extrinsic.inverse())
    rms = math.sqrt(cost / len(res))
    return PoseEstimate(body, rms, Source.VISUAL, stamp)


def track(previous: PoseEstimate, cmd: Twist, dt: float, obs: list[Observation],
          landmarks: LandmarkMap, cam: CameraParams,
          min_landmarks: int = 3) -> PoseEstimate:
    """One localization cycle: predict with the motion model, correct visually.

    The prior is the previous estimate advanced by the commanded twist; the
    returned stamp is previous.stamp + dt regardless of the correction source.
    """
    prior = step(previous.pose, cmd, dt) if dt > 0.0 else previous.pose
    est = estimate_pose(obs, landmarks, prior, cam, min_landmarks=min_landmarks)
    return replace(est, stamp=previous.stamp + dt)
