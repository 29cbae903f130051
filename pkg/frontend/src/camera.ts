/**
 * Pan/zoom camera between world meters (+y up) and canvas pixels (+y down).
 */

export interface Camera {
  // world point at the canvas center
  cx: number;
  cy: number;
  // pixels per meter
  scale: number;
}

export const MIN_SCALE = 4;
export const MAX_SCALE = 400;

export function createCamera(): Camera {
  return { cx: 0, cy: 0, scale: 50 };
}

export function worldToScreen(
  cam: Camera,
  wx: number,
  wy: number,
  canvasW: number,
  canvasH: number
): [number, number] {
  const sx = (wx - cam.cx) * cam.scale + canvasW / 2;
  const sy = canvasH / 2 - (wy - cam.cy) * cam.scale;
  return [sx, sy];
}

export function screenToWorld(
  cam: Camera,
  sx: number,
  sy: number,
  canvasW: number,
  canvasH: number
): [number, number] {
  const wx = (sx - canvasW / 2) / cam.scale + cam.cx;
  const wy = (canvasH / 2 - sy) / cam.scale + cam.cy;
  return [wx, wy];
}

/** Pan by a pixel delta (drag direction, i.e. the world follows the mouse). */
export function panCamera(cam: Camera, dxPx: number, dyPx: number): void {
  cam.cx -= dxPx / cam.scale;
  cam.cy += dyPx / cam.scale;
}

/** Zoom by a factor while keeping the world point under the cursor fixed. */
export function zoomCamera(
  cam: Camera,
  factor: number,
  sx: number,
  sy: number,
  canvasW: number,
  canvasH: number
): void {
  const [wx, wy] = screenToWorld(cam, sx, sy, canvasW, canvasH);
  cam.scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, cam.scale * factor));
  // Re-anchor so (wx, wy) projects to (sx, sy) again.
  cam.cx = wx - (sx - canvasW / 2) / cam.scale;
  cam.cy = wy + (sy - canvasH / 2) / cam.scale;
}

/** Center the map and pick a scale that fits it with a margin. */
export function fitWorld(
  cam: Camera,
  originX: number,
  originY: number,
  widthM: number,
  heightM: number,
  canvasW: number,
  canvasH: number,
  marginPx = 20
): void {
  cam.cx = originX + widthM / 2;
  cam.cy = originY + heightM / 2;
  const sx = (canvasW - 2 * marginPx) / widthM;
  const sy = (canvasH - 2 * marginPx) / heightM;
  cam.scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, Math.min(sx, sy)));
}
