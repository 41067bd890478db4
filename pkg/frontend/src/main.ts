// Operator console: drag the local target on the plan-view canvas, watch the
// true local arm, the remote arm, and the ghost of what the remote controller
// actually sees under the configured delays.

import { pixelToWorkspace, ViewMap } from "./affine.js";
import {
  ConfigureMsg, DELAY_PRESETS, MoveMsg, parseServerFrame, validateDelays,
} from "./protocol.js";
import { formatReadout, renderFrame, SessionView } from "./view.js";

const CANVAS_SIZE = 560;
const WORKSPACE_HALF_EXTENT = 1.0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function serverUrl(): string {
  const param = new URLSearchParams(window.location.search).get("server");
  if (param !== null) return param;
  const proto = window.location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${window.location.host}/ws`;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("workspace");
  canvas.width = CANVAS_SIZE;
  canvas.height = CANVAS_SIZE;
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("2d canvas unsupported");
  const map: ViewMap = { canvasSize: CANVAS_SIZE, halfExtent: WORKSPACE_HALF_EXTENT };

  const view = new SessionView();
  const status = el<HTMLSpanElement>("status");
  const readout = el<HTMLDivElement>("readout");
  const form = el<HTMLFormElement>("config-form");
  const preset = el<HTMLSelectElement>("preset");
  const actionMs = el<HTMLInputElement>("action-ms");
  const obsMinMs = el<HTMLInputElement>("obs-min-ms");
  const obsMaxMs = el<HTMLInputElement>("obs-max-ms");
  const controllerSel = el<HTMLSelectElement>("controller");
  const checkpointPath = el<HTMLInputElement>("checkpoint-path");
  const seedInput = el<HTMLInputElement>("seed");
  const zSlider = el<HTMLInputElement>("z-slider");
  const zLabel = el<HTMLSpanElement>("z-label");
  const validation = el<HTMLDivElement>("validation");
  const applyButton = el<HTMLButtonElement>("apply");
  const pauseButton = el<HTMLButtonElement>("pause");

  DELAY_PRESETS.forEach((p, i) => {
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = p.label;
    preset.appendChild(opt);
  });
  const custom = document.createElement("option");
  custom.value = "custom";
  custom.textContent = "custom";
  preset.appendChild(custom);

  preset.addEventListener("change", () => {
    if (preset.value === "custom") return;
    const p = DELAY_PRESETS[Number(preset.value)];
    actionMs.value = String(p.actionMs);
    obsMinMs.value = String(p.obsMinMs);
    obsMaxMs.value = String(p.obsMaxMs);
    validation.textContent = "";
  });
  preset.value = "1";
  preset.dispatchEvent(new Event("change"));

  let socket: WebSocket | null = null;
  let paused = false;
  let awaitingAck = false;

  // Pointer-to-move throttle: at most one move message per animation frame.
  let pendingMove: MoveMsg | null = null;
  let dragging = false;

  function setFormEnabled(enabled: boolean): void {
    for (const node of [preset, actionMs, obsMinMs, obsMaxMs, controllerSel,
                        checkpointPath, seedInput, applyButton]) {
      (node as HTMLInputElement).disabled = !enabled;
    }
  }

  function connect(): void {
    view.connection = "connecting";
    status.textContent = `connecting to ${serverUrl()}`;
    socket = new WebSocket(serverUrl());
    socket.onopen = () => {
      view.connection = "connected";
      status.textContent = "connected — configure a session";
    };
    socket.onclose = () => {
      view.connection = "disconnected";
      status.textContent = "disconnected — retrying in 2 s";
      socket = null;
      setTimeout(connect, 2000);
    };
    socket.onmessage = (event: MessageEvent<string>) => {
      const frame = parseServerFrame(event.data);
      if (frame === null) return;
      if (frame.type === "telemetry") {
        view.pushTelemetry(frame);
      } else if (frame.type === "ack") {
        if (frame.of === "configure") {
          awaitingAck = false;
          setFormEnabled(true);
          status.textContent = `session ${frame.session_id ?? "?"} live`;
          view.reset();
        } else if (frame.of === "pause") {
          paused = true;
          pauseButton.textContent = "resume";
        } else if (frame.of === "resume") {
          paused = false;
          pauseButton.textContent = "pause";
        }
      } else {
        awaitingAck = false;
        setFormEnabled(true);
        status.textContent = `server: ${frame.message}`;
      }
    };
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const a = Number(actionMs.value);
    const lo = Number(obsMinMs.value);
    const hi = Number(obsMaxMs.value);
    const problem = validateDelays(a, lo, hi);
    if (problem !== null) {
      validation.textContent = problem;
      return;
    }
    validation.textContent = "";
    if (socket === null || socket.readyState !== WebSocket.OPEN) {
      status.textContent = "not connected";
      return;
    }
    const msg: ConfigureMsg = {
      type: "configure",
      action_delay_ms: a,
      obs_delay_min_ms: lo,
      obs_delay_max_ms: hi,
      controller: controllerSel.value as "scripted" | "checkpoint",
      seed: Number(seedInput.value) || 0,
    };
    if (msg.controller === "checkpoint") {
      msg.checkpoint_path = checkpointPath.value;
    }
    awaitingAck = true;
    setFormEnabled(false);
    socket.send(JSON.stringify(msg));
  });

  pauseButton.addEventListener("click", () => {
    if (socket === null || socket.readyState !== WebSocket.OPEN) return;
    socket.send(JSON.stringify({ type: paused ? "resume" : "pause" }));
  });

  zSlider.addEventListener("input", () => {
    zLabel.textContent = Number(zSlider.value).toFixed(2);
  });

  function queueMove(event: PointerEvent): void {
    const rect = canvas.getBoundingClientRect();
    const px = ((event.clientX - rect.left) / rect.width) * CANVAS_SIZE;
    const py = ((event.clientY - rect.top) / rect.height) * CANVAS_SIZE;
    const { x, y } = pixelToWorkspace(map, px, py);
    pendingMove = { type: "move", x, y, z: Number(zSlider.value) };
  }

  canvas.addEventListener("pointerdown", (event) => {
    dragging = true;
    canvas.setPointerCapture(event.pointerId);
    queueMove(event);
  });
  canvas.addEventListener("pointermove", (event) => {
    if (dragging) queueMove(event);
  });
  canvas.addEventListener("pointerup", (event) => {
    dragging = false;
    canvas.releasePointerCapture(event.pointerId);
  });

  function frameLoop(): void {
    if (pendingMove !== null && socket !== null
        && socket.readyState === WebSocket.OPEN && !awaitingAck) {
      socket.send(JSON.stringify(pendingMove));
      pendingMove = null;
    }
    renderFrame(ctx!, view, map);
    readout.textContent = formatReadout(view.latest);
    requestAnimationFrame(frameLoop);
  }

  connect();
  requestAnimationFrame(frameLoop);
}

main();
