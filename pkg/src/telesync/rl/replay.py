"""Transition replay with state-provenance enforcement."""

from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Fixed-capacity ring of (state, action, reward, next_state) transitions.

    Every stored state must carry the provenance the buffer was declared
    with ('delivered' for the model-free variants, 'predicted' for the
    corrected ones); mixing the two is a pipeline bug.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int,
                 provenance: str, dtype=np.float64):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if provenance not in ("delivered", "predicted"):
            raise ValueError(f"unknown provenance {provenance!r}")
        self.capacity = capacity
        self.provenance = provenance
        self.states = np.zeros((capacity, state_dim), dtype=dtype)
        self.actions = np.zeros((capacity, action_dim), dtype=dtype)
        self.rewards = np.zeros((capacity, 1), dtype=dtype)
        self.next_states = np.zeros((capacity, state_dim), dtype=dtype)
        self._ptr = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, state, action, reward, next_state, provenance: str) -> None:
        if provenance != self.provenance:
            raise ValueError(
                f"buffer stores {self.provenance!r} states, got {provenance!r}")
        self.states[self._ptr] = state
        self.actions[self._ptr] = action
        self.rewards[self._ptr] = reward
        self.next_states[self._ptr] = next_state
        self._ptr = (self._ptr + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if self._size < batch_size:
            raise ValueError("not enough transitions to sample")
        idx = rng.integers(0, self._size, size=batch_size)
        return {
            "states": self.states[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_states": self.next_states[idx],
        }


class ModelReplay:
    """Observed one-step transitions (state, force, next_state) for model fits."""

    def __init__(self, capacity: int, state_dim: int = 9, action_dim: int = 3):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.next_states = np.zeros((capacity, state_dim))
        self._ptr = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, state, action, next_state) -> None:
        self.states[self._ptr] = state
        self.actions[self._ptr] = action
        self.next_states[self._ptr] = next_state
        self._ptr = (self._ptr + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> tuple:
        if self._size == 0:
            raise ValueError("model replay is empty")
        idx = rng.integers(0, self._size, size=min(batch_size, self._size))
        return self.states[idx], self.actions[idx], self.next_states[idx]
