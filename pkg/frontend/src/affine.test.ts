import { describe, expect, it } from "vitest";

import { pixelToWorkspace, workspaceToPixel, ViewMap } from "./affine.js";

const MAP: ViewMap = { canvasSize: 560, halfExtent: 1.0 };

describe("workspace/canvas affine map", () => {
  it("maps the canvas center to the workspace origin", () => {
    const { x, y } = pixelToWorkspace(MAP, 280, 280);
    expect(x).toBeCloseTo(0, 10);
    expect(y).toBeCloseTo(0, 10);
  });

  it("maps canvas corners to workspace corners", () => {
    expect(pixelToWorkspace(MAP, 0, 0)).toEqual({ x: -1, y: 1 });
    expect(pixelToWorkspace(MAP, 560, 560)).toEqual({ x: 1, y: -1 });
    expect(pixelToWorkspace(MAP, 560, 0)).toEqual({ x: 1, y: 1 });
  });

  it("round-trips pixel -> workspace -> pixel within 1 px on a 5x5 grid", () => {
    // Acceptance: pixel map round trip across the canvas.
    for (let i = 0; i < 5; i++) {
      for (let j = 0; j < 5; j++) {
        const px = (i / 4) * MAP.canvasSize;
        const py = (j / 4) * MAP.canvasSize;
        const w = pixelToWorkspace(MAP, px, py);
        const back = workspaceToPixel(MAP, w.x, w.y);
        expect(Math.abs(back.px - px)).toBeLessThanOrEqual(1);
        expect(Math.abs(back.py - py)).toBeLessThanOrEqual(1);
      }
    }
  });

  it("round-trips workspace -> pixel -> workspace exactly inside the square", () => {
    for (const x of [-0.9, -0.25, 0, 0.4, 0.99]) {
      for (const y of [-0.8, 0, 0.33, 0.75]) {
        const p = workspaceToPixel(MAP, x, y);
        const w = pixelToWorkspace(MAP, p.px, p.py);
        expect(w.x).toBeCloseTo(x, 10);
        expect(w.y).toBeCloseTo(y, 10);
      }
    }
  });

  it("clamps out-of-canvas drags to the workspace edge", () => {
    expect(pixelToWorkspace(MAP, -50, 280).x).toBe(-1);
    expect(pixelToWorkspace(MAP, 700, 280).x).toBe(1);
    expect(pixelToWorkspace(MAP, 280, -9999).y).toBe(1);
  });
});
