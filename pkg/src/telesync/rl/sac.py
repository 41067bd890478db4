"""Soft actor-critic over the PD-gain action space.

The policy emits a tanh-squashed Gaussian over a 2-vector in (-1, 1)^2 that
maps affinely onto [0, kp_max] x [0, kd_max]. Twin Q networks with polyak
targets, reparameterized policy updates, and automatic entropy-temperature
tuning follow the algorithm's standard published defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..nn.autodiff import Tensor, concat, minimum
from ..nn.mlp import Adam, Mlp
from ..sim import PDGains

LOG_SQUASH_EPS = 1e-6


@dataclass(frozen=True)
class SacConfig:
    hidden: tuple[int, ...] = (256, 256)
    learning_rate: float = 3e-4
    gamma: float = 0.99
    tau: float = 0.005
    batch_size: int = 256
    replay_capacity: int = 200_000
    start_steps: int = 1000
    update_after: int = 1000
    update_every: int = 1
    log_std_min: float = -20.0
    log_std_max: float = 2.0
    kp_max: float = 50.0
    kd_max: float = 10.0
    dtype: str = "float64"

    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


def map_gains(raw: np.ndarray, cfg: SacConfig) -> PDGains:
    """Affine map from the raw (-1,1)^2 action onto the gain box."""
    raw = np.asarray(raw, dtype=float)
    kp = cfg.kp_max * (raw[0] + 1.0) / 2.0
    kd = cfg.kd_max * (raw[1] + 1.0) / 2.0
    return PDGains(float(np.clip(kp, 0.0, cfg.kp_max)),
                   float(np.clip(kd, 0.0, cfg.kd_max)))


class GaussianPolicy:
    """Shared trunk with mean and log-std heads."""

    def __init__(self, input_dim: int, action_dim: int, hidden, seed, dtype):
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        seeds = seed.spawn(3)
        self.trunk = Mlp([input_dim, *hidden], seed=seeds[0], activation="relu",
                         final_activation=True, dtype=dtype)
        self.mean_head = Mlp([hidden[-1], action_dim], seed=seeds[1],
                             activation="relu", dtype=dtype)
        self.log_std_head = Mlp([hidden[-1], action_dim], seed=seeds[2],
                                activation="relu", dtype=dtype)

    def parameters(self):
        return (self.trunk.parameters() + self.mean_head.parameters()
                + self.log_std_head.parameters())

    def forward(self, x: np.ndarray, lo: float, hi: float):
        h = self.trunk.forward(x)
        mean = self.mean_head.forward(h)
        log_std = np.clip(self.log_std_head.forward(h), lo, hi)
        return mean, log_std


class SacAgent:
    """SAC learner; the environment-facing action is the raw 2-vector."""

    def __init__(self, cfg: SacConfig, input_dim: int, seed: int, action_dim: int = 2):
        self.cfg = cfg
        self.input_dim = input_dim
        self.action_dim = action_dim
        dtype = cfg.np_dtype()
        self.dtype = dtype
        root = np.random.SeedSequence(seed)
        s_policy, s_q1, s_q2, s_act, s_upd = root.spawn(5)
        self.policy = GaussianPolicy(input_dim, action_dim, cfg.hidden, s_policy, dtype)
        q_sizes = [input_dim + action_dim, *cfg.hidden, 1]
        self.q1 = Mlp(q_sizes, seed=s_q1, activation="relu", dtype=dtype)
        self.q2 = Mlp(q_sizes, seed=s_q2, activation="relu", dtype=dtype)
        self.q1_target = Mlp(q_sizes, seed=s_q1, activation="relu", dtype=dtype)
        self.q2_target = Mlp(q_sizes, seed=s_q2, activation="relu", dtype=dtype)
        self.q1_target.set_flat(self.q1.get_flat())
        self.q2_target.set_flat(self.q2.get_flat())
        self.log_alpha = Tensor(np.zeros((), dtype=dtype), requires_grad=True)
        self.target_entropy = -float(action_dim)
        lr = cfg.learning_rate
        self.policy_opt = Adam(self.policy.parameters(), lr=lr)
        self.q1_opt = Adam(self.q1.parameters(), lr=lr)
        self.q2_opt = Adam(self.q2.parameters(), lr=lr)
        self.alpha_opt = Adam([self.log_alpha], lr=lr)
        self.action_rng = np.random.default_rng(s_act)
        self.update_rng = np.random.default_rng(s_upd)
        self.updates_done = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha.data))

    # -- acting -------------------------------------------------------------

    def select_action(self, state: np.ndarray, explore: bool) -> np.ndarray:
        """Raw squashed action in (-1,1)^action_dim."""
        state = np.asarray(state, dtype=self.dtype)
        if state.shape != (self.input_dim,):
            raise ValueError(
                f"state dim {state.shape} != expected ({self.input_dim},)")
        mean, log_std = self.policy.forward(
            state, self.cfg.log_std_min, self.cfg.log_std_max)
        if explore:
            eps = self.action_rng.standard_normal(self.action_dim)
            raw = np.tanh(mean + np.exp(log_std) * eps)
        else:
            raw = np.tanh(mean)
        return raw.astype(float)

    def random_action(self) -> np.ndarray:
        return self.action_rng.uniform(-1.0, 1.0, self.action_dim)

    def gains(self, raw: np.ndarray) -> PDGains:
        return map_gains(raw, self.cfg)

    # -- learning -------------------------------------------------------------

    def _sample_policy_t(self, states: np.ndarray, eps: np.ndarray):
        """Tape-recorded squashed-Gaussian sample and its log-probability."""
        h = self.policy.trunk.forward_t(states)
        mean = self.policy.mean_head.forward_t(h)
        log_std = self.policy.log_std_head.forward_t(h).clip(
            self.cfg.log_std_min, self.cfg.log_std_max)
        std = log_std.exp()
        u = mean + std * eps
        action = u.tanh()
        # With u = mean + std*eps the Gaussian log-density reduces to
        # -0.5 eps^2 - log_std - 0.5 log(2 pi) per dimension.
        const = (-0.5 * eps ** 2 - 0.5 * math.log(2.0 * math.pi)).astype(self.dtype)
        gauss = (Tensor(const) - log_std).sum(axis=1, keepdims=True)
        squash = ((1.0 + LOG_SQUASH_EPS) - action.square()).log().sum(
            axis=1, keepdims=True)
        return action, gauss - squash

    def update(self, batch: dict) -> dict:
        """One gradient step on both critics, the policy, and the temperature,
        followed by a polyak target update."""
        cfg = self.cfg
        dt = self.dtype
        states = np.asarray(batch["states"], dtype=dt)
        actions = np.asarray(batch["actions"], dtype=dt)
        rewards = np.asarray(batch["rewards"], dtype=dt)
        next_states = np.asarray(batch["next_states"], dtype=dt)
        B = states.shape[0]

        # Entropy-regularized clipped double-Q target (no terminal states:
        # episodes are pure time limits, so every target bootstraps).
        mean2, log_std2 = self.policy.forward(
            next_states, cfg.log_std_min, cfg.log_std_max)
        eps2 = self.update_rng.standard_normal(mean2.shape).astype(dt)
        u2 = mean2 + np.exp(log_std2) * eps2
        a2 = np.tanh(u2)
        gauss2 = (-0.5 * eps2 ** 2 - log_std2 - 0.5 * math.log(2.0 * math.pi)).sum(
            axis=1, keepdims=True)
        logp2 = gauss2 - np.log((1.0 + LOG_SQUASH_EPS) - a2 ** 2).sum(
            axis=1, keepdims=True)
        xin2 = np.concatenate([next_states, a2], axis=1)
        q_next = np.minimum(self.q1_target.forward(xin2),
                            self.q2_target.forward(xin2))
        alpha = self.alpha
        y = rewards + cfg.gamma * (q_next - alpha * logp2)

        xin = np.concatenate([states, actions], axis=1)
        y_t = Tensor(y)
        q_losses = []
        for q, opt in ((self.q1, self.q1_opt), (self.q2, self.q2_opt)):
            opt.zero_grad()
            pred = q.forward_t(xin)
            loss = (pred - y_t).square().mean()
            loss.backward()
            opt.step()
            q_losses.append(float(loss.data))

        # Reparameterized policy step; critic parameters receive gradients here
        # but are only ever stepped from their own zeroed updates above.
        self.policy_opt.zero_grad()
        eps = self.update_rng.standard_normal((B, self.action_dim)).astype(dt)
        states_t = Tensor(states)
        a_new, logp = self._sample_policy_t(states_t, eps)
        q_in = concat([states_t, a_new], axis=1)
        q_min = minimum(self.q1.forward_t(q_in), self.q2.forward_t(q_in))
        policy_loss = (logp * alpha - q_min).mean()
        policy_loss.backward()
        self.policy_opt.step()

        # Temperature: d/dlog_alpha of -log_alpha * mean(logp + target_entropy).
        logp_mean = float(np.mean(logp.data))
        self.alpha_opt.zero_grad()
        self.log_alpha.grad = np.asarray(
            -(logp_mean + self.target_entropy), dtype=dt)
        self.alpha_opt.step()

        self._polyak(cfg.tau)
        self.updates_done += 1
        return {
            "q1_loss": q_losses[0],
            "q2_loss": q_losses[1],
            "policy_loss": float(policy_loss.data),
            "alpha": self.alpha,
            "entropy": -logp_mean,
        }

    def _polyak(self, tau: float) -> None:
        for online, target in ((self.q1, self.q1_target), (self.q2, self.q2_target)):
            for po, pt in zip(online.parameters(), target.parameters()):
                pt.data = (1.0 - tau) * pt.data + tau * po.data

    # -- checkpoint support ---------------------------------------------------

    def network_sections(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("policy_trunk", self.policy.trunk.get_flat()),
            ("policy_mean", self.policy.mean_head.get_flat()),
            ("policy_log_std", self.policy.log_std_head.get_flat()),
            ("q1", self.q1.get_flat()),
            ("q2", self.q2.get_flat()),
            ("q1_target", self.q1_target.get_flat()),
            ("q2_target", self.q2_target.get_flat()),
            ("log_alpha", np.atleast_1d(self.log_alpha.data)),
        ]

    def load_sections(self, sections: dict[str, np.ndarray]) -> None:
        self.policy.trunk.set_flat(sections["policy_trunk"])
        self.policy.mean_head.set_flat(sections["policy_mean"])
        self.policy.log_std_head.set_flat(sections["policy_log_std"])
        self.q1.set_flat(sections["q1"])
        self.q2.set_flat(sections["q2"])
        self.q1_target.set_flat(sections["q1_target"])
        self.q2_target.set_flat(sections["q2_target"])
        self.log_alpha.data = np.asarray(sections["log_alpha"][0], dtype=self.dtype)
