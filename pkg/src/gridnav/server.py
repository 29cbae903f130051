"""WebSocket bridge: streams simulation snapshots, accepts console commands.

Endpoints:

    GET /healthz      liveness probe, plain "ok"
    GET /world        static world payload (grid geometry, occupancy and
                      static costs run-length encoded, landmarks)
    WS  /ws           one JSON snapshot per simulation tick; accepts JSON
                      commands on the same socket
    GET /             the operator console when a built frontend is found,
                      otherwise a placeholder page

Snapshots carry per-tick state: poses, mode, command, the simplified global
path, a decimated scan (every 4th beam, no-returns encoded as range_max) and
the local costmap window as [value, count] run-length pairs, row-major from
the window origin. Commands are queued and applied between ticks, in arrival
order; while paused only PAUSE/RESUME/RESET apply, anything else waits for
the resume. Malformed messages get an {"error": ...} reply and the
connection stays open.
"""
from __future__ import annotations

import asyncio
import json
import logging
import queue
import threading
import time
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, PlainTextResponse

from .kinematics import Pose2D
from .navigator import NavMode, Simulation
from .scenario import ScenarioConfig, apply_override
from .world import OCCUPIED

log = logging.getLogger("gridnav.server")

SCAN_DECIMATION = 4
KEEPALIVE_PERIOD = 0.25  # wall seconds between repeated snapshots while idle

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>gridnav</title></head>
<body style="font-family: sans-serif">
<h1>gridnav server</h1>
<p>No console build found. The WebSocket endpoint is at <code>/ws</code>,
the static world at <code>/world</code>.</p>
</body></html>
"""


def rle_encode(values) -> list[list[int]]:
    """Run-length encode a flat iterable of small ints as [value, count] pairs."""
    out: list[list[int]] = []
    for v in values:
        v = int(v)
        if out and out[-1][0] == v:
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return out


def rle_decode(pairs) -> list[int]:
    out: list[int] = []
    for value, count in pairs:
        out.extend([int(value)] * int(count))
    return out


def _pose_dict(pose: Pose2D) -> dict:
    return {"x": pose.x, "y": pose.y, "theta": pose.theta}


def build_snapshot(sim: Simulation, events: list[str]) -> dict:
    """Assemble the per-tick wire payload from the live simulation."""
    nav = sim.navigator
    state = nav.state
    est = sim.estimate
    scan_ranges: list[float] = []
    lidar = sim.cfg.lidar
    # Decimated scan, rendered from the estimated pose like a real console.
    rel0 = -lidar.fov_rad / 2.0
    step_rad = lidar.angular_step_rad * SCAN_DECIMATION
    last = sim.last_scan
    if last is not None:
        decimated = last.ranges[::SCAN_DECIMATION]
        scan_ranges = [r if np.isfinite(r) else lidar.range_max for r in decimated.tolist()]
    window = {}
    if sim.costmap.window_bounds is not None:
        ix0, iy0, ix1, iy1 = sim.costmap.window_bounds
        cells = sim.costmap.cost[iy0:iy1, ix0:ix1]
        window = {
            "origin": [sim.costmap.origin.x + ix0 * sim.costmap.resolution,
                       sim.costmap.origin.y + iy0 * sim.costmap.resolution],
            "width": int(ix1 - ix0),
            "height": int(iy1 - iy0),
            "resolution": sim.costmap.resolution,
            "cost_rle": rle_encode(cells.ravel()),
        }
    goal = state.active_goal
    path = state.global_path
    return {
        "tick": sim.tick_index,
        "t": sim.t,
        "mode": state.mode.name,
        "true_pose": _pose_dict(sim.true_pose),
        "est_pose": _pose_dict(est.pose),
        "est_source": est.source.name,
        "cmd": {"v": sim.last_cmd.v, "omega": sim.last_cmd.omega},
        "goal": [goal.x, goal.y] if goal is not None else None,
        "global_path": [[x, y] for x, y in path.waypoints] if path else [],
        "scan": {
            "origin": _pose_dict(est.pose),
            "angle_min": rel0,
            "angle_step": step_rad,
            "range_max": lidar.range_max,
            "ranges": scan_ranges,
        },
        "window": window,
        "events": list(events),
        "failure_reason": state.failure_reason,
    }


def build_world_payload(sim: Simulation) -> dict:
    grid = sim.static_grid
    return {
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "resolution": grid.resolution,
            "origin": [grid.origin.x, grid.origin.y, grid.origin.theta],
        },
        "occupancy_rle": rle_encode(grid.cells.ravel()),
        "static_cost_rle": rle_encode(sim.costmap.static_cost.ravel()),
        "landmarks": [[lm.id, lm.x, lm.y] for lm in sim.landmarks],
        "robot_radius": sim.cfg.robot.radius,
        "goal_tolerance": sim.cfg.nav.goal_tolerance_xy,
    }


class CommandError(ValueError):
    pass


def parse_command(text: str) -> dict:
    """Validate one wire command; raises CommandError on anything malformed."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(f"not valid JSON: {exc}")
    if not isinstance(msg, dict) or "kind" not in msg:
        raise CommandError("command must be an object with a 'kind'")
    kind = msg["kind"]
    def need(*names):
        for name in names:
            if name not in msg or not isinstance(msg[name], (int, float)):
                raise CommandError(f"{kind} needs numeric {name!r}")
    if kind == "SET_GOAL":
        need("x", "y")
    elif kind in ("ADD_OBSTACLE", "REMOVE_OBSTACLE"):
        need("x", "y", "radius")
        if msg["radius"] <= 0:
            raise CommandError("radius must be positive")
    elif kind == "SET_PARAM":
        if not isinstance(msg.get("name"), str) or "value" not in msg:
            raise CommandError("SET_PARAM needs 'name' and 'value'")
    elif kind in ("PAUSE", "RESUME", "RESET"):
        pass
    else:
        raise CommandError(f"unknown command kind {kind!r}")
    return msg


class SimulationService:
    """Owns the simulation thread, the command queue and snapshot fan-out."""

    def __init__(self, cfg: ScenarioConfig, time_scale: float = 1.0):
        if time_scale < 0.0:
            raise ValueError("time_scale must be >= 0")
        self.cfg = cfg
        self.time_scale = time_scale
        self.sim = Simulation(cfg)
        self.paused = False
        self._commands: queue.Queue = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._last_snapshot: dict | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self):
        self._thread = threading.Thread(target=self._loop, name="gridnav-sim",
                                        daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    # -- client side --------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self._subscribers.append(q)
            if self._last_snapshot is not None:
                q.put_nowait(json.dumps(self._last_snapshot))
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)
        q.put(None)  # release a blocked reader

    def submit(self, text: str) -> str | None:
        """Queue a wire command; returns an error reply for malformed input."""
        try:
            msg = parse_command(text)
        except CommandError as exc:
            return json.dumps({"error": str(exc)})
        self._commands.put(msg)
        return None

    # -- simulation thread ----------------------------------------------------

    def _broadcast(self, snapshot: dict):
        text = json.dumps(snapshot)
        with self._lock:
            self._last_snapshot = snapshot
            for q in self._subscribers:
                try:
                    q.put_nowait(text)
                except queue.Full:
                    try:
                        q.get_nowait()  # drop the oldest for a slow consumer
                    except queue.Empty:
                        pass
                    q.put_nowait(text)

    def _apply_command(self, msg: dict) -> list[str]:
        kind = msg["kind"]
        sim = self.sim
        if kind == "SET_GOAL":
            sim.set_goal(float(msg["x"]), float(msg["y"]))
            return []  # the navigator already queues goal_set
        if kind == "ADD_OBSTACLE":
            sim.add_obstacle((float(msg["x"]), float(msg["y"])), float(msg["radius"]))
            return []  # obstacle_added arrives through the sim event queue
        if kind == "REMOVE_OBSTACLE":
            found = sim.remove_obstacle((float(msg["x"]), float(msg["y"])),
                                        float(msg["radius"]))
            return [] if found else ["remove_ignored"]
        if kind == "SET_PARAM":
            try:
                apply_override(self.cfg, msg["name"], str(msg["value"]))
            except Exception as exc:
                return [f"param_rejected:{exc}"]
            return [f"param_set:{msg['name']}"]
        if kind == "RESET":
            self.sim = Simulation(self.cfg)
            self.paused = False
            return ["reset"]
        if kind == "PAUSE":
            if not self.paused:
                self.paused = True
                return ["paused"]
            return []
        if kind == "RESUME":
            if self.paused:
                self.paused = False
                return ["resumed"]
            return []
        return []

    def _drain_commands(self) -> list[str]:
        """Apply queued commands between ticks; paused keeps most of them queued."""
        events: list[str] = []
        deferred = []
        while True:
            try:
                msg = self._commands.get_nowait()
            except queue.Empty:
                break
            if self.paused and msg["kind"] not in ("PAUSE", "RESUME", "RESET"):
                deferred.append(msg)
                continue
            events.extend(self._apply_command(msg))
        for msg in deferred:
            self._commands.put(msg)
        return events

    def _loop(self):
        dt = self.cfg.robot.dt
        while not self._stop.is_set():
            started = time.perf_counter()
            events = self._drain_commands()
            if self.paused or self.sim.done():
                snap = self._last_snapshot
                if snap is None:
                    snap = build_snapshot(self.sim, events)
                elif events:
                    snap = dict(snap, events=list(snap.get("events", [])) + events)
                else:
                    snap = dict(snap, events=[])
                self._broadcast(snap)
                self._stop.wait(KEEPALIVE_PERIOD)
                continue
            self.sim.step()
            snap = build_snapshot(self.sim, events + self.sim.last_events)
            self._broadcast(snap)
            if self.time_scale > 0.0:
                budget = dt / self.time_scale
                elapsed = time.perf_counter() - started
                if budget > elapsed:
                    self._stop.wait(budget - elapsed)


def create_app(cfg: ScenarioConfig, time_scale: float = 1.0,
               console_dir: str | None = None) -> FastAPI:
    """Application factory; the simulation thread follows the app lifespan."""
    service = SimulationService(cfg, time_scale=time_scale)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.start()
        try:
            yield
        finally:
            service.stop()

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz():
        return "ok"

    @app.get("/world")
    async def world():
        return build_world_payload(service.sim)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        q = service.subscribe()
        send_lock = asyncio.Lock()

        async def pump():
            loop = asyncio.get_running_loop()
            while True:
                item = await loop.run_in_executor(None, q.get)
                if item is None:
                    return
                async with send_lock:
                    await ws.send_text(item)

        task = asyncio.create_task(pump())
        try:
            while True:
                text = await ws.receive_text()
                reply = service.submit(text)
                if reply is not None:
                    async with send_lock:
                        await ws.send_text(reply)
        except WebSocketDisconnect:
            pass
        finally:
            service.unsubscribe(q)
            try:
                await asyncio.wait_for(task, timeout=2.0)
            except (asyncio.TimeoutError, asyncio.CancelledError):
                task.cancel()

    if console_dir is None:
        candidate = _default_console_dir()
        console_dir = candidate if candidate else None
    if console_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")
    else:
        @app.get("/", response_class=HTMLResponse)
        async def index():
            return _PLACEHOLDER_PAGE

    return app


def _default_console_dir() -> str | None:
    import os
    here = os.path.dirname(os.path.abspath(__file__))
    candidate = os.path.normpath(os.path.join(here, "..", "..", "frontend", "dist"))
    if os.path.isdir(candidate) and os.path.isfile(os.path.join(candidate, "index.html")):
        return candidate
    return None
