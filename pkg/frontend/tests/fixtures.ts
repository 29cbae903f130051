import { Snapshot, WorldPayload } from "../src/protocol.js";

export function makeSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    tick: 5,
    t: 0.5,
    mode: "FOLLOWING",
    true_pose: { x: 1.0, y: 1.0, theta: 0.0 },
    est_pose: { x: 1.01, y: 0.99, theta: 0.02 },
    est_source: "VISUAL",
    cmd: { v: 0.3, omega: 0.1 },
    goal: [4.0, 3.0],
    global_path: [
      [1.05, 1.05],
      [2.0, 2.0],
      [4.05, 3.05],
    ],
    scan: {
      origin: { x: 1.01, y: 0.99, theta: 0.02 },
      angle_min: -2.356,
      angle_step: 0.025,
      range_max: 6.4,
      ranges: [1.2, 6.4, 0.8],
    },
    window: {},
    events: [],
    failure_reason: null,
    ...overrides,
  };
}

/** 8 x 6 m free room at origin (0, 0). */
export function makeWorld(): WorldPayload {
  return {
    grid: { width: 80, height: 60, resolution: 0.1, origin: [0, 0, 0] },
    occupancy_rle: [[0, 80 * 60]],
    static_cost_rle: [[0, 80 * 60]],
    landmarks: [],
    robot_radius: 0.22,
    goal_tolerance: 0.15,
  };
}
