// Wire protocol frames and client-side validation that mirrors the server's
// delay quantization rule.

export interface TelemetryFrame {
  type: "telemetry";
  tick: number;
  local: [number, number, number];
  remote: [number, number, number];
  delayed_view: [number, number, number];
  error: number;
  kp: number;
  kd: number;
  obs_delay_steps: number;
}

export interface AckFrame {
  type: "ack";
  of: string;
  session_id?: string;
  target?: [number, number, number];
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export type ServerFrame = TelemetryFrame | AckFrame | ErrorFrame;

export interface ConfigureMsg {
  type: "configure";
  action_delay_ms: number;
  obs_delay_min_ms: number;
  obs_delay_max_ms: number;
  controller: "scripted" | "checkpoint";
  checkpoint_path?: string;
  seed: number;
}

export interface MoveMsg {
  type: "move";
  x: number;
  y: number;
  z: number;
}

export const SIM_STEP_MS = 10;

export interface DelayPreset {
  label: string;
  actionMs: number;
  obsMinMs: number;
  obsMaxMs: number;
}

// Named by total-delay range: constant action delay plus 10-50 ms jitter.
export const DELAY_PRESETS: DelayPreset[] = [
  { label: "none", actionMs: 0, obsMinMs: 0, obsMaxMs: 0 },
  { label: "90-130ms", actionMs: 80, obsMinMs: 10, obsMaxMs: 50 },
  { label: "170-210ms", actionMs: 160, obsMinMs: 10, obsMaxMs: 50 },
  { label: "250-290ms", actionMs: 240, obsMinMs: 10, obsMaxMs: 50 },
];

export function validateDelays(
  actionMs: number,
  obsMinMs: number,
  obsMaxMs: number,
  stepMs: number = SIM_STEP_MS,
): string | null {
  for (const [name, value] of [
    ["action delay", actionMs],
    ["min observation delay", obsMinMs],
    ["max observation delay", obsMaxMs],
  ] as const) {
    if (!Number.isFinite(value) || value < 0) {
      return `${name} must be a non-negative number of milliseconds`;
    }
    if (value % stepMs !== 0) {
      return `${name} (${value} ms) must be a multiple of the ${stepMs} ms step`;
    }
  }
  if (obsMaxMs < obsMinMs) {
    return "max observation delay must be >= min observation delay";
  }
  return null;
}

export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as { type?: unknown };
  if (frame.type === "telemetry" || frame.type === "ack" || frame.type === "error") {
    return data as ServerFrame;
  }
  return null;
}
