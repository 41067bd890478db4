"""Integer-step delay channels and action-history state augmentation.

Constant lines model the action delay between choosing a force command and
the plant executing it; stochastic lines model jittery observation delivery.
All delays are integer multiples of the simulation step.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

ACTION_DIM = 3  # plant-level action: force command per axis


class DelayLine:
    """FIFO release queue: payloads pushed at step t become visible later.

    Constant mode releases exactly k steps after the push. Stochastic mode
    draws an integer delay uniformly from [min_steps, max_steps] using the
    line's own seeded generator, clamped so release steps never decrease in
    insertion order (no packet reordering).
    """

    def __init__(self, *, constant: int | None = None,
                 stochastic: tuple[int, int] | None = None,
                 seed: int | None = None):
        if (constant is None) == (stochastic is None):
            raise ValueError("specify exactly one of constant= or stochastic=")
        if constant is not None:
            if constant < 0:
                raise ValueError("constant delay must be >= 0")
            self._k = int(constant)
            self._rng = None
            self._lo = self._hi = None
        else:
            lo, hi = stochastic
            if lo < 0 or hi < lo:
                raise ValueError("stochastic range must satisfy 0 <= min <= max")
            self._k = None
            self._lo, self._hi = int(lo), int(hi)
            self._rng = np.random.default_rng(seed)
        self._queue: deque[tuple[Any, int]] = deque()
        self._last_release: int | None = None
        self.current_step: int | None = None

    @property
    def is_constant(self) -> bool:
        return self._k is not None

    def push(self, payload: Any, now: int) -> None:
        if self.current_step is not None and now < self.current_step:
            raise ValueError(f"push at step {now} behind line step {self.current_step}")
        self.current_step = now
        if self._k is not None:
            release = now + self._k
        else:
            d = int(self._rng.integers(self._lo, self._hi, endpoint=True))
            release = now + d
            if self._last_release is not None:
                release = max(release, self._last_release)
        self._queue.append((payload, release))
        self._last_release = release

    def pop_ready(self, now: int) -> list[Any]:
        """All payloads with release_step <= now, in insertion order."""
        if self.current_step is None or now > self.current_step:
            self.current_step = now
        out = []
        while self._queue and self._queue[0][1] <= now:
            out.append(self._queue.popleft()[0])
        return out

    def __len__(self) -> int:
        return len(self._queue)


def asac_history_len(action_delay_steps: int, obs_delay_max_steps: int) -> int:
    """Augmentation window covering the entire delay length."""
    return action_delay_steps + obs_delay_max_steps


def pmdc_history_len(obs_delay_min_steps: int, obs_delay_max_steps: int) -> int:
    """Augmentation window covering only the stochastic residual."""
    return obs_delay_max_steps - obs_delay_min_steps


class ActionWindow:
    """Ring of the n most recent plant actions, zero-filled at episode start."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("history length must be >= 0")
        self.n = n
        self._ring: deque[np.ndarray] = deque(
            [np.zeros(ACTION_DIM) for _ in range(n)], maxlen=max(n, 1))

    def append(self, action: np.ndarray) -> None:
        action = np.asarray(action, dtype=float)
        if action.shape != (ACTION_DIM,):
            raise ValueError(f"action must have shape ({ACTION_DIM},)")
        if self.n > 0:
            self._ring.append(action.copy())

    def history(self) -> list[np.ndarray]:
        return list(self._ring)[-self.n:] if self.n > 0 else []


@dataclass(frozen=True)
class AugmentedState:
    """Base observation concatenated with a flat recent-action history."""

    base: np.ndarray
    action_history: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.base, self.action_history])

    @property
    def dimension(self) -> int:
        return self.base.size + self.action_history.size


def augment_state(base: np.ndarray, history: Sequence[np.ndarray], n: int) -> AugmentedState:
    """Concatenate an observation with its n most recent actions, newest last.

    The caller's window is responsible for zero-filling slots from before the
    episode start. Total dimension is always len(base) + 3*n.
    """
    base = np.asarray(base, dtype=float)
    if n < 0:
        raise ValueError("n must be >= 0")
    if len(history) != n:
        raise ValueError(f"expected {n} history actions, got {len(history)}")
    if n == 0:
        flat = np.zeros(0)
    else:
        flat = np.concatenate([np.asarray(a, dtype=float) for a in history])
    state = AugmentedState(base.copy(), flat)
    assert state.dimension == base.size + ACTION_DIM * n
    return state


def verify_delay_equivalence(k: int, policy_factory, seed: int, sim_cfg=None) -> bool:
    """Check that a constant action delay k and a constant observation delay k
    produce identical agent-visible episodes.

    Runs two scripted episodes with identical seeds, one with (action=k, obs=0)
    and one with (action=0, obs=k), and compares the full plant trajectories
    plus the observation streams aligned by execution step. Returns True iff
    every comparison matches exactly. ``policy_factory`` builds a fresh
    deterministic obs->force policy per episode (policies may keep per-episode
    state such as a previous-error memory).
    """
    from .envloop import run_scripted_episode  # late import: envloop builds on this module

    if k < 0:
        raise ValueError("k must be >= 0")
    a = run_scripted_episode(policy_factory(), seed, action_delay=k, obs_delay=0,
                             sim_cfg=sim_cfg)
    b = run_scripted_episode(policy_factory(), seed, action_delay=0, obs_delay=k,
                             sim_cfg=sim_cfg)

    for ta, tb in zip(a.truth, b.truth):
        if not (np.array_equal(ta.local_pos, tb.local_pos)
                and np.array_equal(ta.remote_pos, tb.remote_pos)
                and np.array_equal(ta.executed_force, tb.executed_force)):
            return False
    # Inputs align under a shift of k wall steps: the decision executed at
    # plant step t saw the state captured at t - k in both configurations.
    horizon = len(a.inputs) - k
    for t in range(horizon):
        ia, ib = a.inputs[t], b.inputs[t + k]
        if ia is None or ib is None:
            if ia is not None or ib is not None:
                return False
            continue
        if not np.array_equal(ia, ib):
            return False
    return True
