"""Run report: delimited series plus rendered figures.

Writes everything a run leaves behind into one output directory:

    log.csv                  per-tick poses, command and mode
    tracking_error.csv       deviation from the reference path over time
    localization_error.csv   estimate minus truth over time
    summary.json             run outcome and per-column error statistics
    costmap.pgm              final combined costmap, portable graymap text
    trajectory.png           map, reference path, executed and estimated trails
    error_x.png / error_y.png / error_norm.png   tracking error components

Figures are rendered with the Agg backend and stripped of software metadata,
so byte-identical runs produce byte-identical files.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .costmap import Costmap, export_pgm
from .global_planner import Path
from .metrics import (ErrorSeries, localization_error, series_to_csv, summarize,
                      summary_to_dict, tracking_error)
from .scenario import NavigationLog, ScenarioConfig
from .world import OCCUPIED, OccupancyGrid

_PNG_META = {"Software": None}


def _figure_modules():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def render_trajectory(path: str, grid: OccupancyGrid, log: NavigationLog,
                      reference: Path | None) -> None:
    plt = _figure_modules()
    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    extent = (grid.origin.x, grid.origin.x + grid.width * grid.resolution,
              grid.origin.y, grid.origin.y + grid.height * grid.resolution)
    ax.imshow(grid.cells == OCCUPIED, origin="lower", extent=extent,
              cmap="gray_r", interpolation="nearest")
    if reference is not None and reference.waypoints:
        wx = [p[0] for p in reference.waypoints]
        wy = [p[1] for p in reference.waypoints]
        ax.plot(wx, wy, "b--", linewidth=1.2, label="reference path")
    tx = [r.true_pose.x for r in log.records]
    ty = [r.true_pose.y for r in log.records]
    ex = [r.est_pose.x for r in log.records]
    ey = [r.est_pose.y for r in log.records]
    ax.plot(tx, ty, "r-", linewidth=1.0, label="executed")
    ax.plot(ex, ey, "g:", linewidth=1.0, label="estimated")
    if tx:
        ax.plot(tx[0], ty[0], "ko", markersize=6, label="start")
        ax.plot(tx[-1], ty[-1], "k*", markersize=10, label="end")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def render_error_series(path: str, t: np.ndarray, values: np.ndarray,
                        label: str, bound: float | None = None) -> None:
    plt = _figure_modules()
    fig, ax = plt.subplots(figsize=(7.0, 3.0))
    ax.plot(t, values, "b-", linewidth=0.9)
    if bound is not None:
        ax.axhline(bound, color="r", linestyle="--", linewidth=0.8)
        ax.axhline(-bound, color="r", linestyle="--", linewidth=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(label)
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def write_run_report(out_dir: str, cfg: ScenarioConfig, grid: OccupancyGrid,
                     costmap: Costmap, log: NavigationLog,
                     figures: bool = True) -> dict:
    """Write all run artifacts; returns the summary dict that went to JSON."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "log.csv"), "w", encoding="utf-8") as fh:
        fh.write(log.to_csv())
    with open(os.path.join(out_dir, "costmap.pgm"), "w", encoding="utf-8") as fh:
        fh.write(export_pgm(costmap))

    reference = log.reference_path()
    summary: dict = {
        "result": log.result,
        "failure_reason": log.failure_reason,
        "seed": cfg.seed,
        "ticks": len(log.records),
        "sim_time": log.records[-1].t + cfg.robot.dt if log.records else 0.0,
        "goal": [cfg.goal[0], cfg.goal[1]],
    }
    track_series = None
    if reference is not None and log.records:
        track_series = tracking_error(log, reference)
        loc_series = localization_error(log)
        with open(os.path.join(out_dir, "tracking_error.csv"), "w", encoding="utf-8") as fh:
            fh.write(series_to_csv(track_series))
        with open(os.path.join(out_dir, "localization_error.csv"), "w", encoding="utf-8") as fh:
            fh.write(series_to_csv(loc_series))
        summary["tracking_error"] = summary_to_dict(summarize(track_series))
        summary["localization_error"] = summary_to_dict(summarize(loc_series))

    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if figures:
        render_trajectory(os.path.join(out_dir, "trajectory.png"), grid, log, reference)
        if track_series is not None:
            render_error_series(os.path.join(out_dir, "error_x.png"),
                                track_series.t, track_series.ex, "tracking error x [m]")
            render_error_series(os.path.join(out_dir, "error_y.png"),
                                track_series.t, track_series.ey, "tracking error y [m]")
            render_error_series(os.path.join(out_dir, "error_norm.png"),
                                track_series.t, track_series.e_norm, "tracking error norm [m]")
    return summary
