import { describe, expect, it } from "vitest";

import { TelemetryFrame } from "./protocol.js";
import { formatReadout, SessionView, Trail, TRAIL_CAPACITY } from "./view.js";

function frame(tick: number, lx = 0, rx = 0): TelemetryFrame {
  return {
    type: "telemetry", tick, local: [lx, 0, 0], remote: [rx, 0, 0],
    delayed_view: [rx, 0, 0], error: -(Math.abs(lx - rx)), kp: 25, kd: 5,
    obs_delay_steps: 1,
  };
}

describe("trail buffer", () => {
  it("keeps only the most recent points", () => {
    const trail = new Trail();
    for (let i = 0; i < TRAIL_CAPACITY + 50; i++) {
      trail.push(i, 0);
    }
    const pts = trail.points();
    expect(pts.length).toBe(TRAIL_CAPACITY);
    expect(pts[0][0]).toBe(50);
    expect(pts[pts.length - 1][0]).toBe(TRAIL_CAPACITY + 49);
  });
});

describe("session view", () => {
  it("holds the last received values between frames (no extrapolation)", () => {
    const view = new SessionView();
    view.pushTelemetry(frame(1, 0.2, 0.1));
    const latest = view.latest;
    // No new telemetry: latest is literally unchanged.
    expect(view.latest).toBe(latest);
    view.pushTelemetry(frame(2, 0.3, 0.2));
    expect(view.latest!.tick).toBe(2);
    expect(view.localTrail.points().length).toBe(2);
  });

  it("resets trails on reconfigure", () => {
    const view = new SessionView();
    view.pushTelemetry(frame(1));
    view.reset();
    expect(view.latest).toBeNull();
    expect(view.localTrail.points().length).toBe(0);
  });
});

describe("readout", () => {
  it("shows coincident markers as zero error", () => {
    expect(formatReadout(frame(7, 0.5, 0.5))).toContain("error 0.000 m");
  });

  it("has a placeholder before telemetry arrives", () => {
    expect(formatReadout(null)).toContain("—");
  });
});
