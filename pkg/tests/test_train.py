import numpy as np
import pytest

from telesync.envloop import DelaySteps
from telesync.nn.ensemble import EnsembleConfig
from telesync.rl.sac import SacConfig
from telesync.sim import SimConfig
from telesync.train import ModelTrainConfig, evaluate_policy, train_variant

SAC_TINY = SacConfig(hidden=(16, 16), batch_size=32, start_steps=40,
                     update_after=40, replay_capacity=4000)
MODEL_TINY = ModelTrainConfig(ensemble=EnsembleConfig(members=2, hidden=(16, 16)),
                              batch_size=32, updates_per_episode=1,
                              replay_capacity=4000)


def run(variant, delays, steps=150, seed=0):
    return train_variant(variant, SimConfig(), delays, seed, steps,
                         sac_cfg=SAC_TINY, model_cfg=MODEL_TINY)


class TestReplayContent:
    def test_pmdc_stores_predicted_states_only(self):
        res = run("PMDC", DelaySteps(action=4, obs_min=1, obs_max=3, seed=2))
        assert res.replay.provenance == "predicted"
        assert len(res.replay) > 0

    def test_sac_stores_delivered_states_only(self):
        res = run("SAC", DelaySteps(action=4, obs_min=1, obs_max=3, seed=2))
        assert res.replay.provenance == "delivered"

    def test_terminal_transition_excluded(self):
        # Zero delay: no idle steps, so one 50-step episode stores exactly
        # T-1 transitions (the final pair has no successor inside the episode).
        res = run("SAC", DelaySteps(), steps=50)
        assert len(res.replay) == 49

    def test_idle_steps_store_nothing(self):
        # Constant 3-step observation delay: the first 3 decisions are idle,
        # so the first stored pair forms two decisions after delivery starts.
        res = run("SAC", DelaySteps(obs_min=3, obs_max=3), steps=50)
        assert len(res.replay) == 49 - 3

    def test_reward_column_matches_next_state_error(self):
        res = run("PMDC", DelaySteps(action=2, obs_min=1, obs_max=2, seed=1),
                  steps=100)
        n = len(res.replay)
        states = res.replay.next_states[:n]
        rewards = res.replay.rewards[:n, 0]
        expected = -np.linalg.norm(states[:, 0:3] - states[:, 6:9], axis=1)
        assert np.allclose(rewards, expected, atol=1e-12)


class TestTrainingLogs:
    def test_row_bookkeeping(self):
        res = run("PMDC", DelaySteps(action=3), steps=150)
        assert [r.episode for r in res.rows] == [0, 1, 2]
        assert res.rows[-1].env_step == 150
        assert res.rows[-1].ensemble_calls == 3 * (3 + 50)
        assert all(r.mean_reward <= 0 for r in res.rows)

    def test_model_columns_empty_for_model_free(self):
        res = run("A-SAC", DelaySteps(action=2, obs_min=1, obs_max=2, seed=0),
                  steps=100)
        assert all(r.model_loss is None for r in res.rows)
        assert all(r.ensemble_variance is None for r in res.rows)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            run("DDPG", DelaySteps())

    def test_deterministic_across_runs(self):
        a = run("PMDC", DelaySteps(action=2, obs_min=1, obs_max=3, seed=5),
                steps=200, seed=9)
        b = run("PMDC", DelaySteps(action=2, obs_min=1, obs_max=3, seed=5),
                steps=200, seed=9)
        assert [r.mean_reward for r in a.rows] == [r.mean_reward for r in b.rows]
        assert [r.model_loss for r in a.rows] == [r.model_loss for r in b.rows]
        assert np.array_equal(a.agent.policy.trunk.get_flat(),
                              b.agent.policy.trunk.get_flat())


class TestEvaluation:
    def test_eval_requires_model_for_predictive(self):
        res = run("SAC", DelaySteps(), steps=60)
        with pytest.raises(ValueError):
            evaluate_policy(res.agent, "PMDC", SimConfig(), DelaySteps(), 0, 1)

    def test_eval_episode_shape(self):
        res = run("PMDC", DelaySteps(action=2), steps=60)
        evals = evaluate_policy(res.agent, "PMDC", SimConfig(),
                                DelaySteps(action=2), 0, 2, model=res.model)
        assert len(evals) == 2
        assert len(evals[0]["steps"]) == 50
        assert evals[0]["mean_reward"] == pytest.approx(
            np.mean([s["error"] for s in evals[0]["steps"]]))
