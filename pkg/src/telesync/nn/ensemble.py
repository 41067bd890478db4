"""Ensemble dynamics model: independently seeded networks averaged at inference.

Each member maps a normalized (observation, force) pair to a residual on the
normalized next observation. Member disagreement (per-component population
variance) is the model-uncertainty signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .mlp import Adam, Mlp, huber_loss

STATE_DIM = 9
ACTION_DIM = 3


@dataclass(frozen=True)
class NormScales:
    """Fixed input scaling: workspace metres, m/s, and newtons."""

    position: float = 1.0
    velocity: float = 2.0
    force: float = 10.0

    def state_scale(self) -> np.ndarray:
        p, v = self.position, self.velocity
        return np.array([p, p, p, v, v, v, p, p, p])


@dataclass(frozen=True)
class EnsembleConfig:
    members: int = 5
    hidden: tuple[int, ...] = (128, 128)
    learning_rate: float = 3e-4
    huber_delta: float = 1.0
    scales: NormScales = field(default_factory=NormScales)

    def __post_init__(self) -> None:
        if self.members < 1:
            raise ValueError("ensemble needs at least one member")
        if self.huber_delta <= 0:
            raise ValueError("huber_delta must be positive")


class EnsembleModel:
    """m feed-forward models with varying initial weights, averaged for prediction."""

    def __init__(self, cfg: EnsembleConfig, seed: int):
        self.cfg = cfg
        sizes = [STATE_DIM + ACTION_DIM, *cfg.hidden, STATE_DIM]
        seeds = np.random.SeedSequence(seed).spawn(cfg.members)
        self.members = [
            Mlp(sizes, seed=s, activation="tanh") for s in seeds
        ]
        self.optimizers = [
            Adam(m.parameters(), lr=cfg.learning_rate) for m in self.members
        ]
        self._state_scale = cfg.scales.state_scale()
        self.train_steps = 0

    @property
    def size(self) -> int:
        return len(self.members)

    def _encode(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        action = np.asarray(action, dtype=float)
        return np.concatenate(
            [state / self._state_scale, action / self.cfg.scales.force], axis=-1)

    def member_predictions(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        """Stacked next-state predictions, one row per member."""
        if np.shape(state) != (STATE_DIM,) or np.shape(action) != (ACTION_DIM,):
            raise ValueError("predict takes a single (state, action) pair")
        x = self._encode(state, action)
        outs = np.stack([m.forward(x) for m in self.members])
        return np.asarray(state, dtype=float) + outs * self._state_scale

    def predict(self, state: np.ndarray, action: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and per-component population variance of the member predictions."""
        preds = self.member_predictions(state, action)
        mean = preds.mean(axis=0)
        var = preds.var(axis=0)
        return mean, var

    def train_batch(self, states, actions, next_states) -> list[float]:
        """One Adam step per member on the mean Huber loss over the batch.

        Members train on identical data but from distinct initial weights, so
        they remain separate functions. Returns the per-member losses.
        """
        states = np.atleast_2d(np.asarray(states, dtype=float))
        actions = np.atleast_2d(np.asarray(actions, dtype=float))
        next_states = np.atleast_2d(np.asarray(next_states, dtype=float))
        if states.shape[0] == 0:
            raise ValueError("batch must be nonempty")
        x = self._encode(states, actions)
        target = (next_states - states) / self._state_scale
        losses = []
        for net, opt in zip(self.members, self.optimizers):
            opt.zero_grad()
            pred = net.forward_t(x)
            loss = huber_loss(pred, Tensor(target), self.cfg.huber_delta)
            loss.backward()
            opt.step()
            losses.append(float(loss.data))
        self.train_steps += 1
        return losses


def ensemble_predict(ens: EnsembleModel, state, action):
    """Functional alias for EnsembleModel.predict."""
    return ens.predict(state, action)


def ensemble_train(ens: EnsembleModel, states, actions, next_states):
    """Functional alias for EnsembleModel.train_batch."""
    return ens.train_batch(states, actions, next_states)
