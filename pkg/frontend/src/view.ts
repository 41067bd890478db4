// Session view model: the latest telemetry, trail history, and the canvas
// renderer. Drawing uses only received telemetry; between frames the last
// received values stay on screen (no client-side extrapolation).

import { ViewMap, workspaceToPixel } from "./affine.js";
import { TelemetryFrame } from "./protocol.js";

export const TRAIL_CAPACITY = 200;

export class Trail {
  private buf: Array<[number, number]> = [];

  push(x: number, y: number): void {
    this.buf.push([x, y]);
    if (this.buf.length > TRAIL_CAPACITY) {
      this.buf.shift();
    }
  }

  points(): ReadonlyArray<[number, number]> {
    return this.buf;
  }

  clear(): void {
    this.buf = [];
  }
}

export type ConnectionState = "disconnected" | "connecting" | "connected";

export class SessionView {
  connection: ConnectionState = "disconnected";
  latest: TelemetryFrame | null = null;
  readonly localTrail = new Trail();
  readonly remoteTrail = new Trail();

  pushTelemetry(frame: TelemetryFrame): void {
    this.latest = frame;
    this.localTrail.push(frame.local[0], frame.local[1]);
    this.remoteTrail.push(frame.remote[0], frame.remote[1]);
  }

  reset(): void {
    this.latest = null;
    this.localTrail.clear();
    this.remoteTrail.clear();
  }
}

function drawTrail(ctx: CanvasRenderingContext2D, map: ViewMap, trail: Trail,
                   color: string): void {
  const pts = trail.points();
  if (pts.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const { px, py } = workspaceToPixel(map, x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

function drawMarker(ctx: CanvasRenderingContext2D, map: ViewMap,
                    x: number, y: number, color: string, radius: number,
                    ghost = false): void {
  const { px, py } = workspaceToPixel(map, x, y);
  ctx.beginPath();
  ctx.arc(px, py, radius, 0, 2 * Math.PI);
  if (ghost) {
    ctx.strokeStyle = color;
    ctx.setLineDash([4, 3]);
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.setLineDash([]);
  } else {
    ctx.fillStyle = color;
    ctx.fill();
  }
}

export function renderFrame(ctx: CanvasRenderingContext2D, view: SessionView,
                            map: ViewMap): void {
  ctx.clearRect(0, 0, map.canvasSize, map.canvasSize);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, map.canvasSize, map.canvasSize);
  ctx.strokeStyle = "#2a3442";
  ctx.strokeRect(0.5, 0.5, map.canvasSize - 1, map.canvasSize - 1);

  if (view.latest === null) {
    ctx.fillStyle = "#8899aa";
    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(
      view.connection === "connected" ? "configure a session to begin" : "connecting…",
      map.canvasSize / 2, map.canvasSize / 2);
    return;
  }

  const frame = view.latest;
  drawTrail(ctx, map, view.localTrail, "rgba(96, 180, 255, 0.45)");
  drawTrail(ctx, map, view.remoteTrail, "rgba(255, 170, 80, 0.45)");
  drawMarker(ctx, map, frame.delayed_view[0], frame.delayed_view[1],
             "#c0c8d4", 9, true);
  drawMarker(ctx, map, frame.local[0], frame.local[1], "#60b4ff", 7);
  drawMarker(ctx, map, frame.remote[0], frame.remote[1], "#ffaa50", 7);
}

export function formatReadout(frame: TelemetryFrame | null): string {
  if (frame === null) return "error —";
  const err = Math.abs(frame.error);
  return `error ${err.toFixed(3)} m | kp ${frame.kp.toFixed(1)} kd ${frame.kd.toFixed(1)} `
    + `| obs delay ${frame.obs_delay_steps} steps | tick ${frame.tick}`;
}
