import { describe, expect, it } from "vitest";

import {
  DELAY_PRESETS, parseServerFrame, validateDelays,
} from "./protocol.js";

describe("delay validation (mirrors the server quantization rule)", () => {
  it("accepts step-aligned values", () => {
    expect(validateDelays(80, 10, 50)).toBeNull();
    expect(validateDelays(0, 0, 0)).toBeNull();
  });

  it("rejects a non-multiple of the 10 ms step", () => {
    expect(validateDelays(85, 10, 50)).toMatch(/85/);
  });

  it("rejects an inverted observation range", () => {
    expect(validateDelays(80, 50, 10)).toMatch(/>=/);
  });

  it("rejects negative and non-finite values", () => {
    expect(validateDelays(-10, 0, 0)).not.toBeNull();
    expect(validateDelays(NaN, 0, 0)).not.toBeNull();
  });
});

describe("delay presets", () => {
  it("match the evaluated total-delay ranges", () => {
    const byLabel = Object.fromEntries(DELAY_PRESETS.map((p) => [p.label, p]));
    expect(byLabel["250-290ms"]).toMatchObject({
      actionMs: 240, obsMinMs: 10, obsMaxMs: 50,
    });
    expect(byLabel["90-130ms"].actionMs).toBe(80);
    expect(byLabel["170-210ms"].actionMs).toBe(160);
    for (const p of DELAY_PRESETS) {
      expect(validateDelays(p.actionMs, p.obsMinMs, p.obsMaxMs)).toBeNull();
    }
  });
});

describe("server frame parsing", () => {
  it("parses telemetry frames", () => {
    const frame = parseServerFrame(JSON.stringify({
      type: "telemetry", tick: 3, local: [0, 0, 0], remote: [0.1, 0, 0],
      delayed_view: [0, 0, 0], error: -0.1, kp: 25, kd: 5, obs_delay_steps: 2,
    }));
    expect(frame).not.toBeNull();
    expect(frame!.type).toBe("telemetry");
  });

  it("returns null for malformed frames", () => {
    expect(parseServerFrame("not json")).toBeNull();
    expect(parseServerFrame(JSON.stringify({ nope: 1 }))).toBeNull();
    expect(parseServerFrame(JSON.stringify({ type: "mystery" }))).toBeNull();
  });
});
