"""Shared local-remote episode pipeline with delay channels.

Training, benchmarking, the delay-equivalence oracle, and the live service
all drive this same plant: one force command pushed per wall step through a
constant action line, observations returned through a (possibly stochastic)
observation line, with the initial state delivered through the channel like
any other frame. Before the first delivery the controller is idle and the
plant executes the zero in-flight commands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .delays import DelayLine
from .sim import (SimConfig, compute_error, local_operator_policy, mix_states,
                  reset_episode, step_device)


@dataclass(frozen=True)
class DelaySteps:
    """Delay configuration in integer simulation steps."""

    action: int = 0
    obs_min: int = 0
    obs_max: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.action < 0 or self.obs_min < 0:
            raise ValueError("delays must be >= 0")
        if self.obs_max < self.obs_min:
            raise ValueError("obs_max must be >= obs_min")

    @property
    def is_stochastic(self) -> bool:
        return self.obs_max > self.obs_min


@dataclass(frozen=True)
class ObsFrame:
    """One delivered observation: capture step, mixed 9-vector, its reward."""

    step: int
    obs: np.ndarray
    reward: float


@dataclass(frozen=True)
class TruthRecord:
    """Undelayed plant-side log of one wall step."""

    step: int
    local_pos: np.ndarray
    remote_pos: np.ndarray
    executed_force: np.ndarray
    error: float


class TeleopPlant:
    """Local-remote pair plus both delay lines, advanced one step per tick."""

    def __init__(self, sim_cfg: SimConfig, delays: DelaySteps, episode_seed: int,
                 obs_line_seed: int | None = None):
        self.cfg = sim_cfg
        self.delays = delays
        self.local, self.remote = reset_episode(episode_seed, sim_cfg)
        self.wall = 0
        self._action_line = DelayLine(constant=delays.action)
        for i in range(delays.action):
            self._action_line.push(np.zeros(3), now=i - delays.action)
        if delays.is_stochastic:
            seed = delays.seed if obs_line_seed is None else obs_line_seed
            self._obs_line = DelayLine(
                stochastic=(delays.obs_min, delays.obs_max), seed=seed)
        else:
            self._obs_line = DelayLine(constant=delays.obs_min)
        self._capture()

    def _capture(self) -> None:
        mixed = mix_states(self.local, self.remote)
        reward = compute_error(self.remote.position, self.local.position)
        frame = ObsFrame(self.wall, mixed.observation(), reward)
        self._obs_line.push(frame, now=self.wall)

    def deliver(self) -> list[ObsFrame]:
        """All frames released by the current wall step, in capture order."""
        return self._obs_line.pop_ready(self.wall)

    def push_command(self, force: np.ndarray) -> None:
        self._action_line.push(np.asarray(force, dtype=float).copy(), now=self.wall)

    def set_local_target(self, target: np.ndarray) -> np.ndarray:
        """Operator input: reseat the local device's target, clamped to the
        workspace. Returns the applied target."""
        bound = self.cfg.workspace_half_extent
        applied = np.clip(np.asarray(target, dtype=float), -bound, bound)
        self.local.reference = applied.copy()
        return applied

    def advance(self) -> TruthRecord:
        """Execute the due force command and step both devices."""
        released = self._action_line.pop_ready(self.wall)
        if len(released) != 1:
            raise RuntimeError(
                f"expected exactly one due command at step {self.wall}, got {len(released)}")
        force = released[0]
        local_force = local_operator_policy(self.local, self.cfg)
        self.local = step_device(self.local, local_force, self.cfg)
        self.remote = step_device(self.remote, force, self.cfg)
        self.wall += 1
        record = TruthRecord(
            step=self.wall,
            local_pos=self.local.position.copy(),
            remote_pos=self.remote.position.copy(),
            executed_force=force.copy(),
            error=compute_error(self.remote.position, self.local.position),
        )
        self._capture()
        return record


@dataclass
class ScriptedEpisode:
    """Wall-step logs from a scripted (non-learning) run."""

    inputs: list  # newest delivered observation per wall step (None while idle)
    truth: list[TruthRecord]


def run_scripted_episode(policy: Callable[[np.ndarray], np.ndarray], seed: int,
                         action_delay: int, obs_delay: int,
                         sim_cfg: SimConfig | None = None,
                         steps: int | None = None) -> ScriptedEpisode:
    """Drive the plant with a deterministic obs->force policy.

    The policy sees the newest delivered observation each wall step; while no
    observation has been delivered the pushed command is zero force.
    """
    cfg = sim_cfg or SimConfig()
    T = steps or cfg.episode_length
    plant = TeleopPlant(cfg, DelaySteps(action=action_delay, obs_min=obs_delay,
                                        obs_max=obs_delay), episode_seed=seed)
    anchor: np.ndarray | None = None
    inputs: list = []
    truth: list[TruthRecord] = []
    for _ in range(T):
        frames = plant.deliver()
        if frames:
            anchor = frames[-1].obs
        inputs.append(None if anchor is None else anchor.copy())
        command = np.zeros(3) if anchor is None else np.asarray(policy(anchor), dtype=float)
        plant.push_command(command)
        truth.append(plant.advance())
    return ScriptedEpisode(inputs=inputs, truth=truth)
