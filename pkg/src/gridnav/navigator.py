"""Goal-driven navigation loop.

The Navigator owns the costmap layers and the two planners and exposes a
single tick(): feed it the current pose estimate and LiDAR scan, get back the
mode and the twist to execute. Mode machine:

    IDLE -> PLANNING on the first goal; PLANNING plans, simplifies and starts
    FOLLOWING in the same tick; FOLLOWING replans when the remaining path is
    blocked inside the local window or the replan period lapses; planner
    failures trigger one RECOVERY rotation (marks get a chance to decay), a
    second consecutive failure is terminal FAILED; a blocked goal fails
    immediately. REACHED and FAILED are absorbing until the next set_goal.

Commands are zero in every returned state except FOLLOWING and RECOVERY.

The Simulation class closes the loop against a ground-truth world: sensor
simulation, localization, navigation and noisy actuation, with deterministic
per-subsystem RNG streams split from one seed.
"""
from __future__ import annotations

import enum
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .costmap import INSCRIBED, Costmap, LocalWindow, build_static_costmap, update_local
from .geometry import nearest_on_polyline, traverse_cells
from .global_planner import (GoalBlocked, Path, PlanningError, plan, simplify)
from .kinematics import Pose2D, RobotParams, Twist, step
from .local_planner import DwaBlocked, DwaConfig, compute_cmd, dynamic_window
from .localization import PoseEstimate, Source, observe, track
from .scenario import NavParams, NavigationLog, ScenarioConfig, TickRecord
from .world import (LandmarkMap, LidarScan, OccupancyGrid, disc_cells,
                    load_world, simulate_scan)
from .world import OCCUPIED as CELL_OCCUPIED


class NavMode(enum.Enum):
    IDLE = "IDLE"
    PLANNING = "PLANNING"
    FOLLOWING = "FOLLOWING"
    RECOVERY = "RECOVERY"
    REACHED = "REACHED"
    FAILED = "FAILED"


_ZERO = Twist(0.0, 0.0)


@dataclass
class NavState:
    mode: NavMode = NavMode.IDLE
    active_goal: Pose2D | None = None
    global_path: Path | None = None
    last_replan: float = -math.inf
    failure_reason: str | None = None


class Navigator:
    """move_base-style tick loop over costmap, global and local planners."""

    def __init__(self, costmap: Costmap, window: LocalWindow, robot: RobotParams,
                 dwa: DwaConfig, nav: NavParams):
        self.costmap = costmap
        self.window = window
        self.robot = robot
        self.dwa = dwa
        self.nav = nav
        self.state = NavState()
        self.events: list[str] = []
        self._twist = _ZERO
        self._time = 0.0
        self._recovery_end = 0.0
        self._recovery_streak = 0

    def set_goal(self, goal: Pose2D) -> NavState:
        """Accept a goal from any mode and restart planning."""
        st = self.state
        st.active_goal = goal
        st.global_path = None
        st.failure_reason = None
        st.last_replan = -math.inf
        st.mode = NavMode.PLANNING
        self._recovery_streak = 0
        self.events.append("goal_set")
        return st

    def tick(self, estimate: PoseEstimate, scan: LidarScan, dt: float) -> tuple[NavState, Twist]:
        """Advance the loop one control period; returns (state, command)."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self._time += dt
        st = self.state
        if st.mode in (NavMode.IDLE, NavMode.REACHED, NavMode.FAILED):
            return st, _ZERO
        update_local(self.costmap, self.window, scan, estimate.pose)
        if st.mode is NavMode.PLANNING:
            return self._tick_planning(estimate, dt)
        if st.mode is NavMode.FOLLOWING:
            return self._tick_following(estimate, dt)
        return self._tick_recovery(dt)

    # -- mode handlers -----------------------------------------------------

    def _tick_planning(self, est: PoseEstimate, dt: float) -> tuple[NavState, Twist]:
        st = self.state
        if self._at_goal(est):
            return self._finish(NavMode.REACHED)
        try:
            raw = plan(self.costmap, (est.pose.x, est.pose.y),
                       (st.active_goal.x, st.active_goal.y),
                       cost_weight=self.nav.plan_cost_weight)
        except GoalBlocked:
            st.failure_reason = "goal_blocked"
            return self._finish(NavMode.FAILED)
        except PlanningError as exc:
            return self._enter_recovery(f"plan:{type(exc).__name__}")
        st.global_path = simplify(raw, self.costmap)
        st.last_replan = self._time
        self.events.append("replan")
        return self._follow(est, dt)

    def _tick_following(self, est: PoseEstimate, dt: float) -> tuple[NavState, Twist]:
        st = self.state
        if self._at_goal(est):
            return self._finish(NavMode.REACHED)
        if self._path_blocked(est):
            self.events.append("path_blocked")
            return self._yield_to_planning()
        if self._time - st.last_replan >= self.nav.replan_period:
            return self._yield_to_planning()
        return self._follow(est, dt)

    def _tick_recovery(self, dt: float) -> tuple[NavState, Twist]:
        st = self.state
        if self._time >= self._recovery_end:
            st.mode = NavMode.PLANNING
            self._twist = _ZERO
            return st, _ZERO
        cmd = Twist(0.0, self.robot.max_omega / 2.0)
        self._twist = cmd
        return st, cmd

    # -- helpers -----------------------------------------------------------

    def _follow(self, est: PoseEstimate, dt: float) -> tuple[NavState, Twist]:
        st = self.state
        vel_window = dynamic_window(self._twist, self.robot, dt)
        try:
            cmd = compute_cmd(vel_window, est.pose, st.active_goal, st.global_path,
                              self.costmap, self.robot, self.dwa)
        except DwaBlocked:
            return self._enter_recovery("dwa_blocked")
        self._twist = cmd
        self._recovery_streak = 0
        st.mode = NavMode.FOLLOWING
        return st, cmd

    def _yield_to_planning(self) -> tuple[NavState, Twist]:
        st = self.state
        st.mode = NavMode.PLANNING
        self._twist = _ZERO
        return st, _ZERO

    def _finish(self, mode: NavMode) -> tuple[NavState, Twist]:
        st = self.state
        st.mode = mode
        self._twist = _ZERO
        self.events.append(mode.value.lower() if mode is not NavMode.FAILED
                           else f"failed:{st.failure_reason}")
        return st, _ZERO

    def _enter_recovery(self, reason: str) -> tuple[NavState, Twist]:
        st = self.state
        self._twist = _ZERO
        self._recovery_streak += 1
        if self._recovery_streak >= 2:
            st.failure_reason = reason
            return self._finish(NavMode.FAILED)
        st.mode = NavMode.RECOVERY
        self._recovery_end = self._time + self.nav.recovery_duration
        self.events.append("recovery")
        return st, _ZERO

    def _at_goal(self, est: PoseEstimate) -> bool:
        g = self.state.active_goal
        dx = est.pose.x - g.x
        dy = est.pose.y - g.y
        return math.sqrt(dx * dx + dy * dy) <= self.nav.goal_tolerance_xy

    def _path_blocked(self, est: PoseEstimate) -> bool:
        """Is the remaining path blocked by raised costs inside the local window?"""
        st = self.state
        bounds = self.costmap.window_bounds
        if st.global_path is None or bounds is None:
            return False
        pts = st.global_path.waypoints
        qx, qy, _, seg = nearest_on_polyline(pts, est.pose.x, est.pose.y)
        remaining = [(qx, qy)] + list(pts[seg + 1:])
        ix0, iy0, ix1, iy1 = bounds
        for a, b in zip(remaining, remaining[1:]):
            for ix, iy in traverse_cells(a[0], a[1], b[0], b[1],
                                         self.costmap.origin.x, self.costmap.origin.y,
                                         self.costmap.resolution):
                if ix0 <= ix < ix1 and iy0 <= iy < iy1 \
                        and self.costmap.cost[iy, ix] >= INSCRIBED:
                    return True
        if len(remaining) == 1:
            ix, iy = self.costmap.world_to_cell(qx, qy)
            if ix0 <= ix < ix1 and iy0 <= iy < iy1 \
                    and self.costmap.cost[iy, ix] >= INSCRIBED:
                return True
        return False


class Simulation:
    """Ground-truth closed loop: sensors, localization, navigation, actuation.

    One master seed is split into independent child streams for scan noise,
    observation noise and actuation noise, so runs are reproducible bit for
    bit and adding e.g. an extra scan consumer does not shift the others.
    """

    def __init__(self, cfg: ScenarioConfig,
                 world: tuple[OccupancyGrid, LandmarkMap] | None = None):
        self.cfg = cfg
        if world is None:
            world = load_world(cfg.map_path)
        grid, landmarks = world
        self.static_grid = grid.copy()   # pristine; static costmap source
        self.truth_grid = grid.copy()    # mutated by scripted obstacles
        self.landmarks = landmarks
        self.costmap = build_static_costmap(self.static_grid,
                                            inscribed_radius=cfg.robot.radius,
                                            inflation_radius=cfg.costmap.inflation_radius,
                                            decay=cfg.costmap.decay)
        self.window = LocalWindow(side=cfg.costmap.window_side,
                                  persistence=cfg.costmap.persistence)
        self.navigator = Navigator(self.costmap, self.window, cfg.robot, cfg.dwa, cfg.nav)
        seq = np.random.SeedSequence(cfg.seed)
        scan_seed, obs_seed, act_seed = seq.spawn(3)
        self.scan_rng = np.random.default_rng(scan_seed)
        self.obs_rng = np.random.default_rng(obs_seed)
        self.act_rng = np.random.default_rng(act_seed)
        self.true_pose = cfg.start
        self.estimate = PoseEstimate(cfg.start, 0.0, Source.VISUAL, 0.0)
        self.last_cmd = _ZERO
        self.last_scan: LidarScan | None = None
        self.last_events: list[str] = []
        self.t = 0.0
        self.tick_index = 0
        self.log = NavigationLog(seed=cfg.seed)
        self._pending_events: list[str] = []
        self._obstacles: dict[tuple, tuple[list[tuple[int, int]], list[int]]] = {}
        self.navigator.set_goal(Pose2D(cfg.goal[0], cfg.goal[1], 0.0))

    # -- scripted world edits (applied between ticks) ----------------------

    @staticmethod
    def _obstacle_key(center: tuple[float, float], radius: float) -> tuple:
        return (round(center[0], 6), round(center[1], 6), round(radius, 6))

    def add_obstacle(self, center: tuple[float, float], radius: float) -> int:
        """Stamp an occupied disc into the ground truth; returns cells changed.

        Only the simulated world changes: the navigator discovers the obstacle
        through subsequent scans, never through the static costmap.
        """
        key = self._obstacle_key(center, radius)
        if key in self._obstacles:
            return 0
        cells = disc_cells(self.truth_grid, center, radius)
        previous = [int(self.truth_grid.cells[iy, ix]) for ix, iy in cells]
        for ix, iy in cells:
            self.truth_grid.cells[iy, ix] = CELL_OCCUPIED
        self._obstacles[key] = (cells, previous)
        self._pending_events.append("obstacle_added")
        return len(cells)

    def remove_obstacle(self, center: tuple[float, float], radius: float) -> bool:
        """Undo a previously added disc; unknown discs are ignored."""
        key = self._obstacle_key(center, radius)
        entry = self._obstacles.pop(key, None)
        if entry is None:
            return False
        cells, previous = entry
        for (ix, iy), value in zip(cells, previous):
            self.truth_grid.cells[iy, ix] = value
        self._pending_events.append("obstacle_removed")
        return True

    def set_goal(self, x: float, y: float) -> None:
        self.navigator.set_goal(Pose2D(x, y, 0.0))

    # -- loop ---------------------------------------------------------------

    def step(self) -> TickRecord:
        """One closed-loop tick at the control period."""
        cfg = self.cfg
        dt = cfg.robot.dt
        scan = simulate_scan(self.truth_grid, self.true_pose, cfg.lidar,
                             self.scan_rng, stamp=self.t)
        obs = observe(self.true_pose, self.landmarks, cfg.camera, self.obs_rng,
                      grid=self.truth_grid, stamp=self.t)
        dt_pred = self.t - self.estimate.stamp
        est = track(self.estimate, self.last_cmd, dt_pred, obs, self.landmarks,
                    cfg.camera, min_landmarks=cfg.localization.min_landmarks)
        state, cmd = self.navigator.tick(est, scan, dt)
        record = TickRecord(t=self.t, true_pose=self.true_pose, est_pose=est.pose,
                            cmd=cmd, mode=state.mode.name)
        self.log.records.append(record)
        self.last_events = self._pending_events + self.navigator.events
        self._pending_events = []
        self.navigator.events = []
        for event in self.last_events:
            self.log.events.append((self.t, event))
            if event == "replan" and state.global_path is not None:
                self.log.paths.append((self.t, state.global_path))
        self.last_scan = scan
        noisy = Twist(cmd.v + cfg.sim.actuation_sigma_v * self.act_rng.standard_normal(),
                      cmd.omega + cfg.sim.actuation_sigma_omega * self.act_rng.standard_normal())
        self.true_pose = step(self.true_pose, noisy, dt)
        self.estimate = est
        self.last_cmd = cmd
        self.t += dt
        self.tick_index += 1
        return record

    def done(self) -> bool:
        return self.navigator.state.mode in (NavMode.REACHED, NavMode.FAILED)

    def run(self) -> NavigationLog:
        started = time.perf_counter()
        while not self.done() and self.t < self.cfg.duration - 1e-9:
            self.step()
        mode = self.navigator.state.mode
        self.log.result = mode.name if mode in (NavMode.REACHED, NavMode.FAILED) else "TIMEOUT"
        self.log.failure_reason = self.navigator.state.failure_reason
        self.log.wall_time = time.perf_counter() - started
        return self.log

    def state_hash(self) -> str:
        """Digest of the externally visible loop state; stable across idle time."""
        marks = sorted(self.costmap.marked_cells().items())
        payload = repr((self.tick_index, self.t, self.true_pose, self.estimate.pose,
                        self.last_cmd, self.navigator.state.mode.name, marks))
        return hashlib.sha256(payload.encode()).hexdigest()


def run_scenario(cfg: ScenarioConfig,
                 world: tuple[OccupancyGrid, LandmarkMap] | None = None) -> NavigationLog:
    """Run one scenario to REACHED, FAILED or timeout and return the log."""
    return Simulation(cfg, world=world).run()
