"""Per-decision controllers for each algorithm variant.

A controller turns the frames delivered at the current wall step into one
force command. The same objects drive training episodes and live service
ticks, so the delayed pipeline is a single code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .delays import ActionWindow, augment_state
from .envloop import DelaySteps, ObsFrame
from .predictor import (FutureStateBuffer, PredictionCounter, ReferenceTracker,
                        absp_predict, pmdc_observe, sbsp_init, sbsp_recalibrate,
                        sbsp_step)
from .sim import PDGains, SimConfig, clamp_force, pd_action

VARIANTS = ("SAC", "A-SAC", "PMDC", "ABSP")


def variant_history_len(variant: str, delays: DelaySteps) -> int:
    if variant == "SAC":
        return 0
    if variant == "A-SAC":
        return delays.action + delays.obs_max
    if variant in ("PMDC", "ABSP"):
        return delays.obs_max - delays.obs_min
    raise ValueError(f"unknown variant {variant!r}")


def variant_input_dim(variant: str, delays: DelaySteps) -> int:
    return 9 + 3 * variant_history_len(variant, delays)


@dataclass
class Decision:
    """One controller output: the pushed command plus its bookkeeping."""

    force: np.ndarray
    kp: float
    kd: float
    state: np.ndarray | None  # agent input vector, None while idle
    raw_action: np.ndarray | None
    provenance: str
    anchor_step: int | None   # capture step of the newest delivered frame


class _PdMixin:
    """Shared PD-command computation from a 9-component base state."""

    cfg: SimConfig

    def __init__(self):
        self._prev_err: np.ndarray | None = None

    def _command(self, base: np.ndarray, gains: PDGains) -> np.ndarray:
        err = base[6:9] - base[0:3]
        prev = err if self._prev_err is None else self._prev_err
        force = pd_action(gains, err, prev, self.cfg.dt)
        self._prev_err = err
        return clamp_force(force, self.cfg)


class ScriptedGainController(_PdMixin):
    """Fixed-gain PD on the newest delivered observation."""

    provenance = "delivered"

    def __init__(self, gains: PDGains, cfg: SimConfig):
        super().__init__()
        self.gains = gains
        self.cfg = cfg
        self._anchor: ObsFrame | None = None

    def decide(self, frames: list[ObsFrame], wall: int) -> Decision:
        if frames:
            self._anchor = frames[-1]
        if self._anchor is None:
            return Decision(np.zeros(3), 0.0, 0.0, None, None,
                            self.provenance, None)
        force = self._command(self._anchor.obs, self.gains)
        return Decision(force, self.gains.kp, self.gains.kd,
                        self._anchor.obs.copy(), None, self.provenance,
                        self._anchor.step)


class SacVariantController(_PdMixin):
    """SAC and A-SAC: act on the delivered observation, optionally augmented
    with the force-command history over the whole delay length."""

    provenance = "delivered"

    def __init__(self, agent, history_len: int, cfg: SimConfig,
                 action_source: Callable[[np.ndarray], np.ndarray]):
        super().__init__()
        self.agent = agent
        self.cfg = cfg
        self.history_len = history_len
        self.window = ActionWindow(history_len)
        self.action_source = action_source
        self._anchor: ObsFrame | None = None

    def decide(self, frames: list[ObsFrame], wall: int) -> Decision:
        if frames:
            self._anchor = frames[-1]
        if self._anchor is None:
            self.window.append(np.zeros(3))
            return Decision(np.zeros(3), 0.0, 0.0, None, None,
                            self.provenance, None)
        x = augment_state(self._anchor.obs, self.window.history(),
                          self.history_len).vector
        raw = self.action_source(x)
        gains = self.agent.gains(raw)
        force = self._command(self._anchor.obs, gains)
        self.window.append(force)
        return Decision(force, gains.kp, gains.kd, x, raw, self.provenance,
                        self._anchor.step)


class PredictiveVariantController(_PdMixin):
    """PMDC (SBSP) and the ABSP baseline.

    The constant action delay is corrected by prediction; the stochastic
    observation residual is covered by augmenting with the recent command
    history. Until the first observation arrives the controller idles on
    zero commands, matching the zero in-flight initialization.
    """

    provenance = "predicted"

    def __init__(self, agent, model, delays: DelaySteps, cfg: SimConfig,
                 action_source: Callable[[np.ndarray], np.ndarray],
                 counter: PredictionCounter | None = None,
                 method: str = "sbsp", trace=None):
        super().__init__()
        if method not in ("sbsp", "absp"):
            raise ValueError(f"unknown prediction method {method!r}")
        self.agent = agent
        self.model = model
        self.delays = delays
        self.cfg = cfg
        self.method = method
        self.trace = trace
        self.counter = counter if counter is not None else PredictionCounter()
        self.history_len = delays.obs_max - delays.obs_min
        self.window = ActionWindow(self.history_len)
        self.action_source = action_source
        self.reference = ReferenceTracker(cfg.dt, cfg.workspace_half_extent)
        self.buffer: FutureStateBuffer | None = None
        self._anchor: ObsFrame | None = None
        self._commands: dict[int, np.ndarray] = {}

    def _command_at(self, step: int) -> np.ndarray:
        return self._commands.get(step, np.zeros(3))

    def _push(self, wall: int, force: np.ndarray) -> None:
        self._commands[wall + self.delays.action] = force
        self.window.append(force)
        # Commands older than the newest confirmed observation can never be
        # rolled over again; drop them so long-lived sessions stay bounded.
        if self._anchor is not None:
            horizon = self._anchor.step
            for step in [s for s in self._commands if s < horizon]:
                del self._commands[step]

    def decide(self, frames: list[ObsFrame], wall: int) -> Decision:
        alpha = self.delays.action
        for frame in frames:
            self.reference.observe(frame.step, frame.obs[6:9])
            if self.trace is not None:
                self.trace.feed(frame.step, frame.obs)
        if frames:
            self._anchor = frames[-1]
            if self.method == "sbsp":
                if self.buffer is None:
                    in_flight = [self._command_at(s)
                                 for s in range(self._anchor.step, wall + alpha)]
                    self.buffer = sbsp_init(self._anchor.obs, self._anchor.step,
                                            in_flight, self.model, self.counter,
                                            self.reference)
                else:
                    sbsp_recalibrate(self.buffer, self._anchor.obs,
                                     self._anchor.step, self.reference)
        if self._anchor is None:
            self._push(wall, np.zeros(3))
            return Decision(np.zeros(3), 0.0, 0.0, None, None,
                            self.provenance, None)

        if self.method == "sbsp":
            base = self.buffer.entry(wall + alpha)
            x = pmdc_observe(self.buffer, wall + alpha, self.window.history(),
                             self.history_len).vector
        else:
            rolled = absp_predict(
                self._anchor.obs,
                [self._command_at(s) for s in range(self._anchor.step, wall + alpha)],
                self.model, self.counter, self.reference,
                base_step=self._anchor.step)
            base = rolled
            x = augment_state(rolled, self.window.history(),
                              self.history_len).vector

        if self.trace is not None:
            self.trace.note(wall + alpha, base)
        raw = self.action_source(x)
        gains = self.agent.gains(raw)
        force = self._command(base, gains)
        if self.method == "sbsp":
            sbsp_step(self.buffer, force, self.model, self.counter, self.reference)
        self._push(wall, force)
        return Decision(force, gains.kp, gains.kd, x, raw, self.provenance,
                        self._anchor.step)
