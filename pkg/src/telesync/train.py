"""Variant training loops and episode logging."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .controllers import (PredictiveVariantController, SacVariantController,
                          VARIANTS, variant_history_len, variant_input_dim)
from .envloop import DelaySteps, TeleopPlant
from .nn.ensemble import EnsembleConfig, EnsembleModel
from .predictor import PredictionCounter
from .rl.replay import ModelReplay, ReplayBuffer
from .rl.sac import SacAgent, SacConfig
from .sim import SimConfig, reward_from_observation

LOG_COLUMNS = ("episode", "env_step", "variant", "seed", "mean_reward",
               "model_loss", "ensemble_variance", "wallclock_ns", "ensemble_calls")


@dataclass
class EpisodeRow:
    episode: int
    env_step: int
    variant: str
    seed: int
    mean_reward: float
    model_loss: float | None
    ensemble_variance: float | None
    wallclock_ns: int
    ensemble_calls: int

    def as_record(self) -> tuple:
        return (self.episode, self.env_step, self.variant, self.seed,
                f"{self.mean_reward:.10f}",
                "" if self.model_loss is None else f"{self.model_loss:.10f}",
                "" if self.ensemble_variance is None else f"{self.ensemble_variance:.10f}",
                self.wallclock_ns, self.ensemble_calls)


@dataclass
class TrainResult:
    variant: str
    seed: int
    rows: list[EpisodeRow]
    agent: SacAgent
    model: EnsembleModel | None
    counter: PredictionCounter
    total_wallclock_ns: int
    update_wallclock_ns: int
    replay: ReplayBuffer | None = None

    def final_mean_reward(self) -> float:
        return self.rows[-1].mean_reward

    def final_window_mean(self, window: int = 5) -> float:
        tail = self.rows[-window:]
        return float(np.mean([r.mean_reward for r in tail]))


@dataclass(frozen=True)
class ModelTrainConfig:
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    batch_size: int = 256
    updates_per_episode: int = 1
    replay_capacity: int = 100_000


def _episode_seed(run_seed: int, episode: int) -> int:
    return int(np.random.SeedSequence((run_seed, 1000 + episode)).generate_state(1)[0])


def _obs_line_seed(delay_seed: int, run_seed: int, episode: int) -> int:
    return int(np.random.SeedSequence(
        (delay_seed, run_seed, 2000 + episode)).generate_state(1)[0])


class _TransitionAssembler:
    """Rebuilds genuinely observed one-step transitions for model training.

    Consumes every delivered frame (not just the freshest) together with the
    controller's command log; frames still in flight when the episode ends
    are simply lost.
    """

    def __init__(self, replay: ModelReplay, commands: dict[int, np.ndarray]):
        self.replay = replay
        self.commands = commands
        self._obs: dict[int, np.ndarray] = {}

    def on_frames(self, frames) -> None:
        for frame in frames:
            self._obs[frame.step] = frame.obs
            prev = self._obs.get(frame.step - 1)
            if prev is not None:
                force = self.commands.get(frame.step - 1, np.zeros(3))
                self.replay.add(prev, force, frame.obs)


def train_variant(variant: str, sim_cfg: SimConfig, delays: DelaySteps,
                  seed: int, total_env_steps: int,
                  sac_cfg: SacConfig | None = None,
                  model_cfg: ModelTrainConfig | None = None,
                  log_path: str | None = None,
                  explore: bool = True) -> TrainResult:
    """Run one full training campaign for a single (variant, seed) pair.

    SAC consumes the raw delayed observation; A-SAC augments it with the
    command history over the entire delay length; PMDC and ABSP act on the
    predicted future state plus the stochastic-range history, storing
    predicted states in replay. The logged mean_reward is always the true
    plant-side per-step error averaged over the episode.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    sac_cfg = sac_cfg or SacConfig()
    model_cfg = model_cfg or ModelTrainConfig()
    if total_env_steps < sim_cfg.episode_length:
        raise ValueError("total_env_steps must cover at least one episode")

    input_dim = variant_input_dim(variant, delays)
    agent = SacAgent(sac_cfg, input_dim=input_dim,
                     seed=int(np.random.SeedSequence((seed, 1)).generate_state(1)[0]))
    predictive = variant in ("PMDC", "ABSP")
    provenance = "predicted" if predictive else "delivered"
    replay = ReplayBuffer(sac_cfg.replay_capacity, input_dim, agent.action_dim,
                          provenance, dtype=sac_cfg.np_dtype())
    sample_rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))

    model = None
    model_replay = None
    model_rng = None
    if predictive:
        model = EnsembleModel(model_cfg.ensemble,
                              seed=int(np.random.SeedSequence((seed, 3)).generate_state(1)[0]))
        model_replay = ModelReplay(model_cfg.replay_capacity)
        model_rng = np.random.default_rng(np.random.SeedSequence((seed, 4)))

    counter = PredictionCounter()
    rows: list[EpisodeRow] = []
    env_step = 0
    episode = 0
    update_ns = 0
    t_start = time.perf_counter_ns()

    def action_source(x: np.ndarray) -> np.ndarray:
        if explore and env_step < sac_cfg.start_steps:
            return agent.random_action()
        return agent.select_action(x, explore=explore)

    while env_step < total_env_steps:
        plant = TeleopPlant(sim_cfg, delays, _episode_seed(seed, episode),
                            obs_line_seed=_obs_line_seed(delays.seed, seed, episode))
        if predictive:
            controller = PredictiveVariantController(
                agent, model, delays, sim_cfg, action_source, counter,
                method="sbsp" if variant == "PMDC" else "absp")
            assembler = _TransitionAssembler(model_replay, controller._commands)
        else:
            controller = SacVariantController(
                agent, variant_history_len(variant, delays), sim_cfg, action_source)
            assembler = None
        counter.start_episode()
        prev_state = None
        prev_raw = None
        true_rewards = []
        for _ in range(sim_cfg.episode_length):
            frames = plant.deliver()
            if assembler is not None:
                assembler.on_frames(frames)
            decision = controller.decide(frames, plant.wall)
            plant.push_command(decision.force)
            truth = plant.advance()
            true_rewards.append(truth.error)
            if prev_state is not None and decision.state is not None:
                reward = reward_from_observation(decision.state[:9])
                replay.add(prev_state, prev_raw, reward, decision.state,
                           controller.provenance)
            if decision.state is not None:
                prev_state, prev_raw = decision.state, decision.raw_action
            env_step += 1
            if (env_step > sac_cfg.update_after and len(replay) >= sac_cfg.batch_size
                    and env_step % sac_cfg.update_every == 0):
                t0 = time.perf_counter_ns()
                agent.update(replay.sample(sac_cfg.batch_size, sample_rng))
                update_ns += time.perf_counter_ns() - t0

        model_loss = None
        if predictive and len(model_replay) >= model_cfg.batch_size:
            losses = []
            for _ in range(model_cfg.updates_per_episode):
                batch = model_replay.sample(model_cfg.batch_size, model_rng)
                losses.extend(model.train_batch(*batch))
            model_loss = float(np.mean(losses))

        rows.append(EpisodeRow(
            episode=episode,
            env_step=env_step,
            variant=variant,
            seed=seed,
            mean_reward=float(np.mean(true_rewards)),
            model_loss=model_loss,
            ensemble_variance=(counter.mean_variance_this_episode()
                               if predictive else None),
            wallclock_ns=time.perf_counter_ns() - t_start,
            ensemble_calls=counter.total_ensemble_calls,
        ))
        episode += 1

    result = TrainResult(
        variant=variant, seed=seed, rows=rows, agent=agent, model=model,
        counter=counter, total_wallclock_ns=time.perf_counter_ns() - t_start,
        update_wallclock_ns=update_ns, replay=replay)
    if log_path is not None:
        write_training_log(log_path, rows)
    return result


def write_training_log(path, rows: list[EpisodeRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for row in rows:
            writer.writerow(row.as_record())


def evaluate_policy(agent: SacAgent, variant: str, sim_cfg: SimConfig,
                    delays: DelaySteps, seed: int, episodes: int,
                    model: EnsembleModel | None = None) -> list[dict]:
    """Deterministic evaluation episodes; returns per-episode stats and traces."""
    results = []
    counter = PredictionCounter()

    def action_source(x: np.ndarray) -> np.ndarray:
        return agent.select_action(x, explore=False)

    for ep in range(episodes):
        plant = TeleopPlant(sim_cfg, delays, _episode_seed(seed, 50_000 + ep),
                            obs_line_seed=_obs_line_seed(delays.seed, seed, 50_000 + ep))
        if variant in ("PMDC", "ABSP"):
            if model is None:
                raise ValueError(f"{variant} evaluation requires the ensemble model")
            controller = PredictiveVariantController(
                agent, model, delays, sim_cfg, action_source, counter,
                method="sbsp" if variant == "PMDC" else "absp")
        else:
            controller = SacVariantController(
                agent, variant_history_len(variant, delays), sim_cfg, action_source)
        steps = []
        rewards = []
        for _ in range(sim_cfg.episode_length):
            frames = plant.deliver()
            decision = controller.decide(frames, plant.wall)
            plant.push_command(decision.force)
            truth = plant.advance()
            rewards.append(truth.error)
            steps.append({
                "step": truth.step,
                "local": truth.local_pos,
                "remote": truth.remote_pos,
                "error": truth.error,
                "kp": decision.kp,
                "kd": decision.kd,
            })
        results.append({"episode": ep, "mean_reward": float(np.mean(rewards)),
                        "steps": steps})
    return results
