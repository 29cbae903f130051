/**
 * Wire types and decoding for the gridnav server.
 *
 * The server speaks JSON over a single WebSocket: one snapshot object per
 * simulation tick, `{"error": ...}` replies for malformed input. Commands
 * go the other way as flat objects keyed by `kind`. The static world comes
 * from GET /world once per session. Grid payloads are run-length encoded
 * as [value, count] pairs over the row-major cell array, row 0 at the map
 * origin (lowest y).
 */

export interface PoseMsg {
  x: number;
  y: number;
  theta: number;
}

export interface ScanMsg {
  origin: PoseMsg;
  angle_min: number;
  angle_step: number;
  range_max: number;
  ranges: number[];
}

export interface WindowMsg {
  origin: [number, number];
  width: number;
  height: number;
  resolution: number;
  cost_rle: [number, number][];
}

export interface Snapshot {
  tick: number;
  t: number;
  mode: string;
  true_pose: PoseMsg;
  est_pose: PoseMsg;
  est_source: string;
  cmd: { v: number; omega: number };
  goal: [number, number] | null;
  global_path: [number, number][];
  scan: ScanMsg;
  window: WindowMsg | Record<string, never>;
  events: string[];
  failure_reason: string | null;
}

export interface WorldPayload {
  grid: {
    width: number;
    height: number;
    resolution: number;
    origin: [number, number, number];
  };
  occupancy_rle: [number, number][];
  static_cost_rle: [number, number][];
  landmarks: [number, number, number][];
  robot_radius: number;
  goal_tolerance: number;
}

export type Command =
  | { kind: "SET_GOAL"; x: number; y: number }
  | { kind: "ADD_OBSTACLE"; x: number; y: number; radius: number }
  | { kind: "REMOVE_OBSTACLE"; x: number; y: number; radius: number }
  | { kind: "SET_PARAM"; name: string; value: number | string }
  | { kind: "PAUSE" }
  | { kind: "RESUME" }
  | { kind: "RESET" };

/** Occupancy cell values, mirroring the map file legend. */
export const FREE = 0;
export const OCCUPIED = 1;
export const UNKNOWN = 2;

/** Cost scale markers; 1..252 is the inflation band. */
export const INSCRIBED = 253;
export const LETHAL = 254;
export const UNKNOWN_COST = 255;

export function rleDecode(pairs: [number, number][]): number[] {
  const out: number[] = [];
  for (const [value, count] of pairs) {
    if (!Number.isInteger(count) || count < 1) {
      throw new Error(`bad run length ${count}`);
    }
    for (let i = 0; i < count; i++) out.push(value);
  }
  return out;
}

/** Total cell count without materializing the runs. */
export function rleLength(pairs: [number, number][]): number {
  let n = 0;
  for (const [, count] of pairs) n += count;
  return n;
}

export type Frame =
  | { type: "snapshot"; snapshot: Snapshot }
  | { type: "error"; message: string };

function isPose(v: unknown): v is PoseMsg {
  const p = v as PoseMsg;
  return (
    typeof p === "object" &&
    p !== null &&
    typeof p.x === "number" &&
    typeof p.y === "number" &&
    typeof p.theta === "number"
  );
}

/**
 * Classify and validate one incoming WebSocket message.
 *
 * Throws on text that is neither a snapshot nor an error reply; the caller
 * decides whether that tears down the connection or just logs.
 */
export function parseFrame(text: string): Frame {
  const msg = JSON.parse(text);
  if (typeof msg !== "object" || msg === null) {
    throw new Error("frame is not an object");
  }
  if (typeof msg.error === "string") {
    return { type: "error", message: msg.error };
  }
  if (
    typeof msg.tick !== "number" ||
    typeof msg.t !== "number" ||
    typeof msg.mode !== "string" ||
    !isPose(msg.true_pose) ||
    !isPose(msg.est_pose) ||
    !Array.isArray(msg.events) ||
    !Array.isArray(msg.global_path)
  ) {
    throw new Error("frame is not a snapshot");
  }
  const win = msg.window;
  if (win && typeof win.width === "number") {
    if (rleLength(win.cost_rle) !== win.width * win.height) {
      throw new Error("window RLE does not cover width*height cells");
    }
  }
  return { type: "snapshot", snapshot: msg as Snapshot };
}

export function parseWorld(msg: unknown): WorldPayload {
  const w = msg as WorldPayload;
  if (
    typeof w !== "object" ||
    w === null ||
    typeof w.grid !== "object" ||
    typeof w.grid.width !== "number" ||
    typeof w.grid.height !== "number" ||
    typeof w.grid.resolution !== "number" ||
    !Array.isArray(w.occupancy_rle) ||
    !Array.isArray(w.static_cost_rle)
  ) {
    throw new Error("world payload malformed");
  }
  const cells = w.grid.width * w.grid.height;
  if (rleLength(w.occupancy_rle) !== cells) {
    throw new Error("occupancy RLE does not cover the grid");
  }
  if (rleLength(w.static_cost_rle) !== cells) {
    throw new Error("static cost RLE does not cover the grid");
  }
  return w;
}
