/**
 * Console view state: the latest snapshot, the camera, the selected tool,
 * and the error-trace history. Everything here is derived from server
 * messages plus local UI choices; reconnecting rebuilds the same view from
 * the next snapshot alone.
 */
import { Camera, createCamera, screenToWorld } from "./camera.js";
import { Command, Snapshot, WorldPayload } from "./protocol.js";

export type Tool = "GOAL" | "OBSTACLE" | "ERASE";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ErrorSample {
  t: number;
  ex: number;
  ey: number;
  enorm: number;
}

/** Fixed-capacity FIFO that drops the oldest sample when full. */
export class RingBuffer<T> {
  private items: T[] = [];
  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
  }
  push(item: T): void {
    this.items.push(item);
    if (this.items.length > this.capacity) this.items.shift();
  }
  toArray(): readonly T[] {
    return this.items;
  }
  get length(): number {
    return this.items.length;
  }
  clear(): void {
    this.items = [];
  }
}

export interface PlacedObstacle {
  x: number;
  y: number;
  radius: number;
}

export interface ViewState {
  world: WorldPayload | null;
  snapshot: Snapshot | null;
  camera: Camera;
  tool: Tool;
  obstacleRadius: number;
  connection: ConnectionStatus;
  errors: RingBuffer<ErrorSample>;
  // Obstacles this console placed; REMOVE_OBSTACLE must echo the exact
  // center and radius back, so erasing only works on our own markers.
  placed: PlacedObstacle[];
  warning: string | null;
}

export const ERROR_TRACE_CAPACITY = 600;
export const DEFAULT_OBSTACLE_RADIUS = 0.15;

export function createViewState(): ViewState {
  return {
    world: null,
    snapshot: null,
    camera: createCamera(),
    tool: "GOAL",
    obstacleRadius: DEFAULT_OBSTACLE_RADIUS,
    connection: "connecting",
    errors: new RingBuffer(ERROR_TRACE_CAPACITY),
    placed: [],
    warning: null,
  };
}

/**
 * Fold one snapshot into the view. Appends a localization-error sample
 * (estimate minus truth) and resets history when the run restarts.
 */
export function pushSnapshot(view: ViewState, snap: Snapshot): void {
  const prev = view.snapshot;
  if (snap.events.includes("reset") || (prev !== null && snap.t < prev.t)) {
    view.errors.clear();
    view.placed = [];
  }
  const ex = snap.est_pose.x - snap.true_pose.x;
  const ey = snap.est_pose.y - snap.true_pose.y;
  const last = view.errors.toArray();
  const tail = last.length > 0 ? last[last.length - 1] : null;
  if (tail === null || snap.t > tail.t) {
    view.errors.push({ t: snap.t, ex, ey, enorm: Math.hypot(ex, ey) });
  }
  view.snapshot = snap;
}

export function insideMap(world: WorldPayload, wx: number, wy: number): boolean {
  const g = world.grid;
  const [ox, oy] = [g.origin[0], g.origin[1]];
  return (
    wx >= ox &&
    wy >= oy &&
    wx < ox + g.width * g.resolution &&
    wy < oy + g.height * g.resolution
  );
}

export interface ClickResult {
  command: Command | null;
  warning: string | null;
}

/**
 * Turn a canvas click into a command for the current tool.
 *
 * Clicks outside the map produce a warning and no command. ERASE picks the
 * nearest marker this console placed; with none in range it warns instead.
 */
export function clickToCommand(
  view: ViewState,
  sx: number,
  sy: number,
  canvasW: number,
  canvasH: number
): ClickResult {
  if (view.world === null) {
    return { command: null, warning: "world not loaded yet" };
  }
  const [wx, wy] = screenToWorld(view.camera, sx, sy, canvasW, canvasH);
  if (!insideMap(view.world, wx, wy)) {
    return { command: null, warning: "click is outside the map" };
  }
  switch (view.tool) {
    case "GOAL":
      return { command: { kind: "SET_GOAL", x: wx, y: wy }, warning: null };
    case "OBSTACLE": {
      const radius = view.obstacleRadius;
      view.placed.push({ x: wx, y: wy, radius });
      return { command: { kind: "ADD_OBSTACLE", x: wx, y: wy, radius }, warning: null };
    }
    case "ERASE": {
      let best: PlacedObstacle | null = null;
      let bestD = Infinity;
      for (const ob of view.placed) {
        const d = Math.hypot(ob.x - wx, ob.y - wy);
        if (d < bestD) {
          best = ob;
          bestD = d;
        }
      }
      if (best === null || bestD > Math.max(0.3, best.radius * 2)) {
        return { command: null, warning: "no placed obstacle near the click" };
      }
      view.placed = view.placed.filter((ob) => ob !== best);
      return {
        command: { kind: "REMOVE_OBSTACLE", x: best.x, y: best.y, radius: best.radius },
        warning: null,
      };
    }
  }
}
