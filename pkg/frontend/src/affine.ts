// Workspace <-> canvas mapping for the plan (x, y) view.
// The workspace square [-halfExtent, halfExtent]^2 fills the canvas with a
// fixed aspect ratio; canvas y grows downward, workspace y grows upward.

export interface ViewMap {
  canvasSize: number;
  halfExtent: number;
}

export interface Pixel {
  px: number;
  py: number;
}

export interface PlanPoint {
  x: number;
  y: number;
}

export function workspaceToPixel(map: ViewMap, x: number, y: number): Pixel {
  const scale = map.canvasSize / (2 * map.halfExtent);
  return {
    px: (x + map.halfExtent) * scale,
    py: (map.halfExtent - y) * scale,
  };
}

export function pixelToWorkspace(map: ViewMap, px: number, py: number): PlanPoint {
  const scale = (2 * map.halfExtent) / map.canvasSize;
  const x = px * scale - map.halfExtent;
  const y = map.halfExtent - py * scale;
  return {
    x: clamp(x, -map.halfExtent, map.halfExtent),
    y: clamp(y, -map.halfExtent, map.halfExtent),
  };
}

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}
