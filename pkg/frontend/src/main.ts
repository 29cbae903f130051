/**
 * Browser entry point: wires the WebSocket, the toolbar and the canvases
 * around the pure modules. Drag pans, wheel zooms, click acts with the
 * selected tool.
 */
import { fitWorld, panCamera, zoomCamera } from "./camera.js";
import { parseFrame, parseWorld, WindowMsg, WorldPayload } from "./protocol.js";
import { renderScene, renderTraces, windowPixels, worldPixels } from "./render.js";
import {
  clickToCommand,
  createViewState,
  pushSnapshot,
  Tool,
} from "./state.js";

const view = createViewState();

const mapCanvas = document.getElementById("map") as HTMLCanvasElement;
const traceCanvas = document.getElementById("traces") as HTMLCanvasElement;
const statusEl = document.getElementById("status")!;
const warningEl = document.getElementById("warning")!;
const modeEl = document.getElementById("mode")!;

let ws: WebSocket | null = null;
let worldImage: HTMLCanvasElement | null = null;
let windowImage: HTMLCanvasElement | null = null;
let windowKey = "";
let warningTimer = 0;

function pixelsToCanvas(
  data: Uint8ClampedArray<ArrayBuffer>,
  width: number,
  height: number
): HTMLCanvasElement {
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d")!;
  ctx.putImageData(new ImageData(data, width, height), 0, 0);
  return canvas;
}

function showWarning(text: string): void {
  view.warning = text;
  warningEl.textContent = text;
  warningEl.classList.add("visible");
  window.clearTimeout(warningTimer);
  warningTimer = window.setTimeout(() => {
    view.warning = null;
    warningEl.classList.remove("visible");
  }, 2500);
}

function setStatus(text: string, cls: string): void {
  statusEl.textContent = text;
  statusEl.className = cls;
}

function send(command: unknown): void {
  if (ws === null || ws.readyState !== WebSocket.OPEN) {
    showWarning("not connected");
    return;
  }
  ws.send(JSON.stringify(command));
}

function draw(): void {
  const ctx = mapCanvas.getContext("2d")!;
  renderScene(view, ctx, mapCanvas.width, mapCanvas.height, {
    world: worldImage,
    window: windowImage,
  });
  renderTraces(view, traceCanvas.getContext("2d")!, traceCanvas.width, traceCanvas.height);
  if (view.snapshot !== null) {
    const s = view.snapshot;
    const src = s.est_source === "VISUAL" ? "visual" : "dead reckoning";
    let text = `${s.mode}  t=${s.t.toFixed(1)}s  tick=${s.tick}  pose: ${src}`;
    if (s.failure_reason !== null) text += `  (${s.failure_reason})`;
    modeEl.textContent = text;
  }
}

let drawQueued = false;
function scheduleDraw(): void {
  if (drawQueued) return;
  drawQueued = true;
  requestAnimationFrame(() => {
    drawQueued = false;
    draw();
  });
}

function adoptWorld(world: WorldPayload): void {
  view.world = world;
  worldImage = pixelsToCanvas(
    worldPixels(world), world.grid.width, world.grid.height);
  fitWorld(
    view.camera,
    world.grid.origin[0],
    world.grid.origin[1],
    world.grid.width * world.grid.resolution,
    world.grid.height * world.grid.resolution,
    mapCanvas.width,
    mapCanvas.height
  );
  scheduleDraw();
}

function refreshWindowImage(): void {
  const win = view.snapshot?.window as WindowMsg | undefined;
  if (!win || typeof win.width !== "number") {
    windowImage = null;
    windowKey = "";
    return;
  }
  // Cheap change detection; windows repeat verbatim while paused.
  const key = `${win.origin[0]},${win.origin[1]},${win.width},${win.height},${win.cost_rle.length}`;
  if (key === windowKey && windowImage !== null) return;
  windowImage = pixelsToCanvas(windowPixels(win), win.width, win.height);
  windowKey = key;
}

function connect(): void {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  view.connection = "connecting";
  setStatus("connecting", "connecting");
  ws = new WebSocket(`${proto}://${location.host}/ws`);
  ws.addEventListener("open", () => {
    view.connection = "open";
    setStatus("connected", "open");
  });
  ws.addEventListener("message", (event) => {
    let frame;
    try {
      frame = parseFrame(String(event.data));
    } catch (err) {
      console.error("bad frame", err);
      return;
    }
    if (frame.type === "error") {
      showWarning(`server: ${frame.message}`);
      return;
    }
    pushSnapshot(view, frame.snapshot);
    refreshWindowImage();
    scheduleDraw();
  });
  ws.addEventListener("close", () => {
    view.connection = "closed";
    setStatus("disconnected, retrying", "closed");
    window.setTimeout(connect, 1000);
  });
}

function bindToolbar(): void {
  const buttons = Array.from(
    document.querySelectorAll<HTMLButtonElement>("button[data-tool]"));
  for (const btn of buttons) {
    btn.addEventListener("click", () => {
      view.tool = btn.dataset.tool as Tool;
      for (const other of buttons) {
        other.classList.toggle("active", other === btn);
      }
    });
  }
  const radius = document.getElementById("radius") as HTMLInputElement;
  const radiusLabel = document.getElementById("radius-label")!;
  radius.addEventListener("input", () => {
    view.obstacleRadius = Number(radius.value);
    radiusLabel.textContent = `${view.obstacleRadius.toFixed(2)} m`;
  });
  document.getElementById("pause")!.addEventListener("click", () => send({ kind: "PAUSE" }));
  document.getElementById("resume")!.addEventListener("click", () => send({ kind: "RESUME" }));
  document.getElementById("reset")!.addEventListener("click", () => send({ kind: "RESET" }));
}

function bindCanvas(): void {
  let dragging = false;
  let moved = 0;
  let lastX = 0;
  let lastY = 0;
  mapCanvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    moved = 0;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  });
  mapCanvas.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    const dx = ev.offsetX - lastX;
    const dy = ev.offsetY - lastY;
    moved += Math.abs(dx) + Math.abs(dy);
    panCamera(view.camera, dx, dy);
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    scheduleDraw();
  });
  window.addEventListener("mouseup", (ev) => {
    if (!dragging) return;
    dragging = false;
    if (moved > 4) return; // that was a pan, not a click
    const rect = mapCanvas.getBoundingClientRect();
    const result = clickToCommand(
      view,
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      mapCanvas.width,
      mapCanvas.height
    );
    if (result.warning !== null) showWarning(result.warning);
    if (result.command !== null) send(result.command);
    scheduleDraw();
  });
  mapCanvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
    zoomCamera(view.camera, factor, ev.offsetX, ev.offsetY,
               mapCanvas.width, mapCanvas.height);
    scheduleDraw();
  });
}

function resize(): void {
  const host = mapCanvas.parentElement!;
  mapCanvas.width = host.clientWidth;
  mapCanvas.height = host.clientHeight;
  traceCanvas.width = traceCanvas.parentElement!.clientWidth;
  traceCanvas.height = 140;
  scheduleDraw();
}

async function main(): Promise<void> {
  bindToolbar();
  bindCanvas();
  window.addEventListener("resize", resize);
  resize();
  try {
    const response = await fetch("/world");
    adoptWorld(parseWorld(await response.json()));
  } catch (err) {
    showWarning(`world fetch failed: ${err}`);
  }
  connect();
}

window.addEventListener("load", main);
