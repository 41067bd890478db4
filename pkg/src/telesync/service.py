"""Live teleoperation session server.

One WebSocket connection owns one session: a real-time tick loop at the
simulation step period driving the same plant/delay/controller pipeline as
training, with the human's pointer target replacing the scripted episode
target. Incoming messages are serialized onto the tick loop via a queue;
telemetry frames go back one JSON object per message.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .checkpoint import CheckpointError, load_agent
from .controllers import (PredictiveVariantController, ScriptedGainController,
                          SacVariantController, variant_history_len,
                          variant_input_dim)
from .envloop import TeleopPlant
from .harness import ConfigError, DelayConfig
from .predictor import PredictionCounter
from .sim import EXPERT_KD, EXPERT_KP, PDGains, SimConfig

MAX_CATCHUP_TICKS = 10


class SessionError(ValueError):
    pass


@dataclass
class SessionSettings:
    delays: DelayConfig
    controller: str
    checkpoint_path: str | None
    seed: int


def _parse_configure(msg: dict) -> SessionSettings:
    required = ("action_delay_ms", "obs_delay_min_ms", "obs_delay_max_ms",
                "controller", "seed")
    missing = [k for k in required if k not in msg]
    if missing:
        raise SessionError(f"configure message missing keys: {missing}")
    controller = msg["controller"]
    if controller not in ("scripted", "checkpoint"):
        raise SessionError(f"unknown controller {controller!r}")
    if controller == "checkpoint" and not msg.get("checkpoint_path"):
        raise SessionError("checkpoint controller requires checkpoint_path")
    try:
        delays = DelayConfig(
            action_delay_ms=int(msg["action_delay_ms"]),
            obs_delay_min_ms=int(msg["obs_delay_min_ms"]),
            obs_delay_max_ms=int(msg["obs_delay_max_ms"]),
            delay_seed=int(msg["seed"]))
    except (TypeError, ValueError) as exc:
        raise SessionError(f"invalid delay values: {exc}") from exc
    return SessionSettings(delays=delays, controller=controller,
                           checkpoint_path=msg.get("checkpoint_path"),
                           seed=int(msg["seed"]))


class Session:
    """Deterministic tick pipeline; wall-clock scheduling lives in the loop."""

    _counter = 0

    def __init__(self, settings: SessionSettings, sim_cfg: SimConfig | None = None):
        Session._counter += 1
        self.session_id = f"session-{Session._counter}"
        self.sim_cfg = sim_cfg or SimConfig()
        try:
            steps = settings.delays.steps(self.sim_cfg.dt)
        except ConfigError as exc:
            raise SessionError(str(exc)) from exc
        self.delays = steps
        self.settings = settings
        self.plant = TeleopPlant(self.sim_cfg, steps, episode_seed=settings.seed,
                                 obs_line_seed=settings.seed)
        self._initial_remote = self.plant.remote.position.copy()
        self.paused = False
        self.tick_count = 0
        if settings.controller == "scripted":
            self.controller = ScriptedGainController(
                PDGains(EXPERT_KP, EXPERT_KD), self.sim_cfg)
        else:
            try:
                agent, model, meta = load_agent(settings.checkpoint_path)
            except (OSError, CheckpointError, KeyError) as exc:
                raise SessionError(f"cannot load checkpoint: {exc}") from exc
            variant = meta["variant"]
            expected = variant_input_dim(variant, steps)
            if agent.input_dim != expected:
                raise SessionError(
                    f"checkpoint input dim {agent.input_dim} does not match "
                    f"variant {variant} under these delays (needs {expected})")
            source = lambda x: agent.select_action(x, explore=False)
            if variant in ("PMDC", "ABSP"):
                if model is None:
                    raise SessionError(f"{variant} checkpoint is missing its ensemble")
                self.controller = PredictiveVariantController(
                    agent, model, steps, self.sim_cfg, source,
                    PredictionCounter(),
                    method="sbsp" if variant == "PMDC" else "absp")
            else:
                self.controller = SacVariantController(
                    agent, variant_history_len(variant, steps), self.sim_cfg, source)

    def tick(self, operator_target: np.ndarray | None) -> dict:
        """Advance one simulation step and build the telemetry frame."""
        if operator_target is not None:
            self.plant.set_local_target(operator_target)
        frames = self.plant.deliver()
        decision = self.controller.decide(frames, self.plant.wall)
        self.plant.push_command(decision.force)
        truth = self.plant.advance()
        self.tick_count += 1
        anchor = getattr(self.controller, "_anchor", None)
        if anchor is not None:
            delayed_view = anchor.obs[0:3]
            obs_delay_steps = self.tick_count - anchor.step
        else:
            delayed_view = self._initial_remote
            obs_delay_steps = self.tick_count
        return {
            "type": "telemetry",
            "tick": self.tick_count,
            "local": [float(v) for v in truth.local_pos],
            "remote": [float(v) for v in truth.remote_pos],
            "delayed_view": [float(v) for v in delayed_view],
            "error": float(truth.error),
            "kp": float(decision.kp),
            "kd": float(decision.kd),
            "obs_delay_steps": int(obs_delay_steps),
        }


def replay_session(settings: SessionSettings, targets: list) -> list[dict]:
    """Re-run a recorded session offline: same pipeline, no wall clock.

    ``targets`` holds one operator target (or None) per tick.
    """
    session = Session(settings)
    return [session.tick(t) for t in targets]


def create_app(sim_cfg: SimConfig | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="telesync teleoperation service")
    sim = sim_cfg or SimConfig()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()

        async def reader() -> None:
            try:
                while True:
                    raw = await ws.receive_text()
                    await queue.put(raw)
            except WebSocketDisconnect:
                await queue.put(None)
            except RuntimeError:
                await queue.put(None)

        reader_task = asyncio.create_task(reader())
        session: Session | None = None
        pending_target: np.ndarray | None = None
        loop = asyncio.get_running_loop()
        next_deadline = loop.time()

        async def send(obj: dict) -> None:
            await ws.send_text(json.dumps(obj))

        async def handle(raw: str) -> bool:
            nonlocal session, pending_target, next_deadline
            try:
                msg = json.loads(raw)
                if not isinstance(msg, dict) or "type" not in msg:
                    raise ValueError("frame must be an object with a 'type'")
            except ValueError as exc:
                await send({"type": "error", "message": f"malformed frame: {exc}"})
                return True
            kind = msg["type"]
            if kind == "configure":
                try:
                    settings = _parse_configure(msg)
                    session = Session(settings, sim)
                except SessionError as exc:
                    await send({"type": "error", "message": str(exc)})
                    return True
                pending_target = None
                next_deadline = loop.time() + sim.dt
                await send({"type": "ack", "of": "configure",
                            "session_id": session.session_id})
            elif kind == "move":
                if session is None:
                    await send({"type": "error", "message": "no session configured"})
                    return True
                try:
                    target = np.array([float(msg["x"]), float(msg["y"]),
                                       float(msg["z"])])
                except (KeyError, TypeError, ValueError):
                    await send({"type": "error",
                                "message": "move requires numeric x, y, z"})
                    return True
                bound = session.sim_cfg.workspace_half_extent
                clamped = np.clip(target, -bound, bound)
                pending_target = clamped
                await send({"type": "ack", "of": "move",
                            "target": [float(v) for v in clamped]})
            elif kind == "pause":
                if session is not None:
                    session.paused = True
                await send({"type": "ack", "of": "pause"})
            elif kind == "resume":
                if session is not None:
                    session.paused = False
                    next_deadline = loop.time() + sim.dt
                await send({"type": "ack", "of": "resume"})
            else:
                await send({"type": "error", "message": f"unknown type {kind!r}"})
            return True

        try:
            while True:
                running = session is not None and not session.paused
                if running:
                    timeout = max(0.0, next_deadline - loop.time())
                else:
                    timeout = None
                try:
                    raw = await asyncio.wait_for(queue.get(), timeout)
                    if raw is None:
                        break
                    await handle(raw)
                    continue
                except asyncio.TimeoutError:
                    pass
                frame = session.tick(pending_target)
                pending_target = None
                await send(frame)
                next_deadline += sim.dt
                if loop.time() - next_deadline > MAX_CATCHUP_TICKS * sim.dt:
                    next_deadline = loop.time() + sim.dt
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()

    if static_dir is not None and Path(static_dir).is_dir():
        static_path = Path(static_dir)

        @app.get("/")
        async def index() -> FileResponse:
            return FileResponse(static_path / "index.html")

        app.mount("/static", StaticFiles(directory=static_path), name="static")

    return app
