/**
 * Immediate-mode canvas rendering. Full redraw per snapshot; nothing here
 * mutates the snapshot or the view beyond the cached world bitmap.
 */
import { worldToScreen } from "./camera.js";
import {
  FREE,
  INSCRIBED,
  LETHAL,
  OCCUPIED,
  rleDecode,
  Snapshot,
  UNKNOWN,
  UNKNOWN_COST,
  WindowMsg,
  WorldPayload,
} from "./protocol.js";
import { ViewState } from "./state.js";

// Base cell colors: white free, black obstacles, gray unknown; the
// inflation band tints free space red by cost.
const FREE_RGB = [245, 245, 245];
const OCCUPIED_RGB = [25, 25, 25];
const UNKNOWN_RGB = [150, 150, 150];
const INFLATION_RGB = [205, 60, 45];

/**
 * RGBA pixels for the static map, one pixel per cell, top row first.
 * Pure so it can be checked without a canvas.
 */
export function worldPixels(world: WorldPayload): Uint8ClampedArray<ArrayBuffer> {
  const { width, height } = world.grid;
  const occ = rleDecode(world.occupancy_rle);
  const cost = rleDecode(world.static_cost_rle);
  const data = new Uint8ClampedArray(width * height * 4);
  for (let iy = 0; iy < height; iy++) {
    const row = height - 1 - iy; // grid row 0 is the lowest y
    for (let ix = 0; ix < width; ix++) {
      const cell = iy * width + ix;
      const px = (row * width + ix) * 4;
      let rgb = FREE_RGB;
      if (occ[cell] === OCCUPIED) rgb = OCCUPIED_RGB;
      else if (occ[cell] === UNKNOWN) rgb = UNKNOWN_RGB;
      let [r, g, b] = rgb;
      const c = cost[cell];
      if (occ[cell] === FREE && c > 0 && c <= INSCRIBED) {
        const a = c >= INSCRIBED ? 0.75 : 0.1 + 0.5 * (c / INSCRIBED);
        r = r + (INFLATION_RGB[0] - r) * a;
        g = g + (INFLATION_RGB[1] - g) * a;
        b = b + (INFLATION_RGB[2] - b) * a;
      }
      data[px] = r;
      data[px + 1] = g;
      data[px + 2] = b;
      data[px + 3] = 255;
    }
  }
  return data;
}

/** RGBA pixels for the rolling cost window overlay (transparent at cost 0). */
export function windowPixels(win: WindowMsg): Uint8ClampedArray<ArrayBuffer> {
  const { width, height } = win;
  const cost = rleDecode(win.cost_rle);
  const data = new Uint8ClampedArray(width * height * 4);
  for (let iy = 0; iy < height; iy++) {
    const row = height - 1 - iy;
    for (let ix = 0; ix < width; ix++) {
      const c = cost[iy * width + ix];
      const px = (row * width + ix) * 4;
      if (c === 0) continue;
      if (c === UNKNOWN_COST) {
        data[px] = 120;
        data[px + 1] = 120;
        data[px + 2] = 120;
        data[px + 3] = 60;
      } else {
        const heat = Math.min(c, LETHAL) / LETHAL;
        data[px] = 255;
        data[px + 1] = 120 * (1 - heat);
        data[px + 2] = 40 * (1 - heat);
        data[px + 3] = 40 + 140 * heat;
      }
    }
  }
  return data;
}

/** Constant-twist arc from the estimated pose, for the local rollout line. */
export function rolloutPoints(
  snap: Snapshot,
  horizon = 1.0,
  steps = 12
): [number, number][] {
  const pts: [number, number][] = [];
  let { x, y, theta } = snap.est_pose;
  const dt = horizon / steps;
  const { v, omega } = snap.cmd;
  for (let i = 0; i < steps; i++) {
    x += v * Math.cos(theta) * dt;
    y += v * Math.sin(theta) * dt;
    theta += omega * dt;
    pts.push([x, y]);
  }
  return pts;
}

/** Anything drawImage accepts; kept loose so tests can stub it. */
export type DrawableImage = { width: number; height: number };

export interface SceneImages {
  world: DrawableImage | null;
  window: DrawableImage | null;
}

function polyline(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  pts: [number, number][],
  w: number,
  h: number
): void {
  ctx.beginPath();
  pts.forEach(([wx, wy], i) => {
    const [sx, sy] = worldToScreen(view.camera, wx, wy, w, h);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.stroke();
}

function circle(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  wx: number,
  wy: number,
  radiusM: number,
  w: number,
  h: number
): void {
  const [sx, sy] = worldToScreen(view.camera, wx, wy, w, h);
  ctx.beginPath();
  ctx.arc(sx, sy, radiusM * view.camera.scale, 0, Math.PI * 2);
  ctx.stroke();
}

/**
 * Draw the whole scene. Raster layers arrive pre-baked in `images`; the
 * caller owns that cache because only it knows when the world changed.
 */
export function renderScene(
  view: ViewState,
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number,
  images: SceneImages
): void {
  ctx.fillStyle = "#20242b";
  ctx.fillRect(0, 0, w, h);
  const world = view.world;
  const snap = view.snapshot;

  if (world !== null && images.world !== null) {
    const g = world.grid;
    const [sx0, sy0] = worldToScreen(
      view.camera, g.origin[0], g.origin[1] + g.height * g.resolution, w, h);
    const [sx1, sy1] = worldToScreen(
      view.camera, g.origin[0] + g.width * g.resolution, g.origin[1], w, h);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(images.world as CanvasImageSource, sx0, sy0, sx1 - sx0, sy1 - sy0);
  } else {
    ctx.fillStyle = "#9aa3ad";
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for the world payload", 16, 28);
  }

  if (world !== null) {
    ctx.strokeStyle = "#2e96b8";
    ctx.lineWidth = 1;
    for (const [, lx, ly] of world.landmarks) {
      const [sx, sy] = worldToScreen(view.camera, lx, ly, w, h);
      ctx.beginPath();
      ctx.moveTo(sx, sy - 4);
      ctx.lineTo(sx + 4, sy);
      ctx.lineTo(sx, sy + 4);
      ctx.lineTo(sx - 4, sy);
      ctx.closePath();
      ctx.stroke();
    }
  }

  if (snap === null) {
    ctx.fillStyle = "#9aa3ad";
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for snapshots", 16, 48);
    return;
  }

  const win = snap.window as WindowMsg;
  if (images.window !== null && typeof win.width === "number") {
    const [sx0, sy0] = worldToScreen(
      view.camera, win.origin[0], win.origin[1] + win.height * win.resolution, w, h);
    const [sx1, sy1] = worldToScreen(
      view.camera, win.origin[0] + win.width * win.resolution, win.origin[1], w, h);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(images.window as CanvasImageSource, sx0, sy0, sx1 - sx0, sy1 - sy0);
  }

  if (snap.global_path.length > 0) {
    ctx.strokeStyle = "#3fae5a";
    ctx.lineWidth = 2;
    polyline(ctx, view, snap.global_path, w, h);
  }

  if (snap.goal !== null) {
    const [gx, gy] = snap.goal;
    const [sx, sy] = worldToScreen(view.camera, gx, gy, w, h);
    ctx.strokeStyle = "#d8a231";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(sx - 6, sy);
    ctx.lineTo(sx + 6, sy);
    ctx.moveTo(sx, sy - 6);
    ctx.lineTo(sx, sy + 6);
    ctx.stroke();
    if (world !== null) {
      ctx.lineWidth = 1;
      circle(ctx, view, gx, gy, world.goal_tolerance, w, h);
    }
  }

  // Scan endpoints, skipping no-returns (encoded as range_max).
  const scan = snap.scan;
  ctx.fillStyle = "#e2833a";
  scan.ranges.forEach((r, i) => {
    if (r >= scan.range_max) return;
    const a = scan.origin.theta + scan.angle_min + i * scan.angle_step;
    const [sx, sy] = worldToScreen(
      view.camera,
      scan.origin.x + r * Math.cos(a),
      scan.origin.y + r * Math.sin(a),
      w,
      h
    );
    ctx.fillRect(sx - 1, sy - 1, 2, 2);
  });

  if (snap.cmd.v !== 0 || snap.cmd.omega !== 0) {
    ctx.strokeStyle = "#d8d44a";
    ctx.lineWidth = 1.5;
    polyline(ctx, view, rolloutPoints(snap), w, h);
  }

  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#8a8f98";
  ctx.lineWidth = 1;
  for (const ob of view.placed) {
    circle(ctx, view, ob.x, ob.y, ob.radius, w, h);
  }
  // True pose as a dashed ghost next to the solid estimate.
  const radius = world !== null ? world.robot_radius : 0.22;
  ctx.strokeStyle = "#7b6fd0";
  circle(ctx, view, snap.true_pose.x, snap.true_pose.y, radius, w, h);
  ctx.setLineDash([]);

  const est = snap.est_pose;
  ctx.strokeStyle = "#2e5fd0";
  ctx.lineWidth = 2;
  circle(ctx, view, est.x, est.y, radius, w, h);
  const [hx, hy] = worldToScreen(
    view.camera,
    est.x + radius * Math.cos(est.theta),
    est.y + radius * Math.sin(est.theta),
    w,
    h
  );
  const [cx, cy] = worldToScreen(view.camera, est.x, est.y, w, h);
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(hx, hy);
  ctx.stroke();
}

/** Strip chart of the localization-error traces (est minus true). */
export function renderTraces(
  view: ViewState,
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number
): void {
  ctx.fillStyle = "#20242b";
  ctx.fillRect(0, 0, w, h);
  const samples = view.errors.toArray();
  ctx.font = "11px monospace";
  if (samples.length < 2) {
    ctx.fillStyle = "#9aa3ad";
    ctx.fillText("error traces: waiting for data", 8, 16);
    return;
  }
  const t0 = samples[0].t;
  const t1 = samples[samples.length - 1].t;
  const span = Math.max(t1 - t0, 1e-9);
  let peak = 0.05;
  for (const s of samples) {
    peak = Math.max(peak, Math.abs(s.ex), Math.abs(s.ey), s.enorm);
  }
  const px = (t: number) => ((t - t0) / span) * (w - 10) + 5;
  const py = (v: number) => h / 2 - (v / peak) * (h / 2 - 14);

  ctx.strokeStyle = "#3a4049";
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();

  const series: ["ex" | "ey" | "enorm", string][] = [
    ["ex", "#4a90d8"],
    ["ey", "#3fae5a"],
    ["enorm", "#d85a4a"],
  ];
  for (const [key, color] of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.2;
    ctx.beginPath();
    samples.forEach((s, i) => {
      if (i === 0) ctx.moveTo(px(s.t), py(s[key]));
      else ctx.lineTo(px(s.t), py(s[key]));
    });
    ctx.stroke();
  }
  const last = samples[samples.length - 1];
  ctx.fillStyle = "#4a90d8";
  ctx.fillText(`ex ${last.ex.toFixed(3)} m`, 8, 14);
  ctx.fillStyle = "#3fae5a";
  ctx.fillText(`ey ${last.ey.toFixed(3)} m`, 108, 14);
  ctx.fillStyle = "#d85a4a";
  ctx.fillText(`|e| ${last.enorm.toFixed(3)} m`, 208, 14);
  ctx.fillStyle = "#9aa3ad";
  ctx.fillText(`±${peak.toFixed(2)} m`, w - 70, 14);
}
