"""Run evaluation: tracking and localization error series plus summaries.

Tracking error measures how far the executed (true) trajectory strayed from
the reference path accepted at the first plan: for every logged tick the
deviation vector runs from the nearest point on the reference polyline to the
true position, so a constant offset of (0.1, 0) against a straight reference
yields ex == 0.1 for the whole series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import nearest_on_polyline
from .global_planner import Path
from .kinematics import wrap_angle


@dataclass
class ErrorSeries:
    """Per-tick error components; arrays share one length."""

    t: np.ndarray
    ex: np.ndarray
    ey: np.ndarray
    e_norm: np.ndarray
    e_theta: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.t)
        for arr in (self.ex, self.ey, self.e_norm):
            if len(arr) != n:
                raise ValueError("series arrays must share one length")
        if self.e_theta is not None and len(self.e_theta) != n:
            raise ValueError("series arrays must share one length")

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"ex": self.ex, "ey": self.ey, "e_norm": self.e_norm}
        if self.e_theta is not None:
            cols["e_theta"] = self.e_theta
        return cols


@dataclass(frozen=True)
class ColumnStats:
    max_abs: float
    rms: float
    mean: float


def tracking_error(log, reference: Path) -> ErrorSeries:
    """Deviation of the true trajectory from a reference path, per tick."""
    if not log.records:
        raise ValueError("empty navigation log")
    if not reference.waypoints:
        raise ValueError("empty reference path")
    n = len(log.records)
    t = np.empty(n)
    ex = np.empty(n)
    ey = np.empty(n)
    for i, rec in enumerate(log.records):
        qx, qy, _, _ = nearest_on_polyline(reference.waypoints,
                                           rec.true_pose.x, rec.true_pose.y)
        t[i] = rec.t
        ex[i] = rec.true_pose.x - qx
        ey[i] = rec.true_pose.y - qy
    return ErrorSeries(t=t, ex=ex, ey=ey, e_norm=np.sqrt(ex * ex + ey * ey))


def localization_error(log) -> ErrorSeries:
    """Estimated minus true pose, per tick, with wrapped heading error."""
    if not log.records:
        raise ValueError("empty navigation log")
    n = len(log.records)
    t = np.empty(n)
    ex = np.empty(n)
    ey = np.empty(n)
    eth = np.empty(n)
    for i, rec in enumerate(log.records):
        t[i] = rec.t
        ex[i] = rec.est_pose.x - rec.true_pose.x
        ey[i] = rec.est_pose.y - rec.true_pose.y
        eth[i] = wrap_angle(rec.est_pose.theta - rec.true_pose.theta)
    return ErrorSeries(t=t, ex=ex, ey=ey,
                       e_norm=np.sqrt(ex * ex + ey * ey), e_theta=eth)


def summarize(series: ErrorSeries) -> dict[str, ColumnStats]:
    """Per-column max |value|, RMS and mean."""
    out = {}
    for name, arr in series.columns().items():
        out[name] = ColumnStats(
            max_abs=float(np.max(np.abs(arr))),
            rms=float(math.sqrt(float(np.mean(arr * arr)))),
            mean=float(np.mean(arr)),
        )
    return out


def series_to_csv(series: ErrorSeries) -> str:
    """Column layout t,ex,ey,e_norm[,e_theta]; floats keep full round-trip precision."""
    cols = series.columns()
    header = "t," + ",".join(cols.keys())
    lines = [header]
    names = list(cols.keys())
    for i in range(len(series.t)):
        row = [repr(float(series.t[i]))]
        row.extend(repr(float(cols[name][i])) for name in names)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_to_dict(summary: dict[str, ColumnStats]) -> dict:
    return {name: {"max_abs": s.max_abs, "rms": s.rms, "mean": s.mean}
            for name, s in summary.items()}
