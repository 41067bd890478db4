import numpy as np
import pytest

from telesync.rl.replay import ModelReplay, ReplayBuffer
from telesync.rl.sac import SacAgent, SacConfig, map_gains


@pytest.fixture
def small_cfg():
    return SacConfig(hidden=(32, 32), batch_size=16, replay_capacity=1000)


@pytest.fixture
def agent(small_cfg):
    return SacAgent(small_cfg, input_dim=9, seed=0)


class TestGainMapping:
    def test_midpoint(self, small_cfg):
        g = map_gains(np.zeros(2), small_cfg)
        assert g.kp == pytest.approx(small_cfg.kp_max / 2)
        assert g.kd == pytest.approx(small_cfg.kd_max / 2)

    def test_endpoints(self, small_cfg):
        hi = map_gains(np.array([1.0, -1.0]), small_cfg)
        assert hi.kp == pytest.approx(small_cfg.kp_max)
        assert hi.kd == pytest.approx(0.0)

    def test_monotone_and_surjective(self, small_cfg):
        raws = np.linspace(-1, 1, 21)
        kps = [map_gains(np.array([r, 0.0]), small_cfg).kp for r in raws]
        assert all(b >= a for a, b in zip(kps, kps[1:]))
        assert kps[0] == 0.0 and kps[-1] == small_cfg.kp_max

    def test_sampled_actions_inside_open_cube(self, agent):
        state = np.zeros(9)
        for _ in range(10_000):
            raw = agent.select_action(state, explore=True)
            assert np.all(np.abs(raw) < 1.0)


class TestSelectAction:
    def test_eval_mode_deterministic(self, agent):
        state = np.random.default_rng(0).normal(size=9)
        a1 = agent.select_action(state, explore=False)
        a2 = agent.select_action(state, explore=False)
        assert np.array_equal(a1, a2)

    def test_dimension_mismatch_rejected(self, agent):
        with pytest.raises(ValueError):
            agent.select_action(np.zeros(10), explore=False)

    def test_untrained_eval_near_midgains(self, small_cfg):
        # tanh of small random-head output stays near zero raw action
        agent = SacAgent(small_cfg, input_dim=9, seed=3)
        raw = agent.select_action(np.zeros(9), explore=False)
        g = agent.gains(raw)
        assert 0 < g.kp < small_cfg.kp_max
        assert 0 < g.kd < small_cfg.kd_max


def random_batch(rng, n, dim, adim=2):
    return {
        "states": rng.normal(size=(n, dim)),
        "actions": rng.uniform(-0.9, 0.9, size=(n, adim)),
        "rewards": rng.normal(size=(n, 1)) * 0.1,
        "next_states": rng.normal(size=(n, dim)),
    }


class TestSacUpdate:
    def test_losses_finite_with_zero_gamma(self, small_cfg):
        cfg = SacConfig(hidden=(32, 32), gamma=0.0, batch_size=16)
        agent = SacAgent(cfg, input_dim=9, seed=1)
        batch = random_batch(np.random.default_rng(0), 16, 9)
        batch["rewards"][:] = 0.0
        out = agent.update(batch)
        assert np.isfinite(out["q1_loss"]) and np.isfinite(out["q2_loss"])
        assert np.isfinite(out["policy_loss"])

    def test_q_loss_decreases_on_fixed_batch(self, small_cfg):
        agent = SacAgent(small_cfg, input_dim=9, seed=2)
        batch = random_batch(np.random.default_rng(1), 16, 9)
        first = agent.update(batch)
        for _ in range(100):
            last = agent.update(batch)
        assert last["q1_loss"] < first["q1_loss"]

    def test_temperature_decreases_when_entropy_above_target(self, small_cfg):
        agent = SacAgent(small_cfg, input_dim=9, seed=3)
        batch = random_batch(np.random.default_rng(2), 16, 9)
        # Fresh policy entropy for a 2-dim action is far above -2.
        log_alpha_before = float(agent.log_alpha.data)
        out = agent.update(batch)
        assert out["entropy"] > agent.target_entropy
        assert float(agent.log_alpha.data) < log_alpha_before

    def test_polyak_tau_zero_and_one(self, small_cfg):
        agent = SacAgent(small_cfg, input_dim=9, seed=4)
        before = agent.q1_target.get_flat().copy()
        online_before = agent.q1.get_flat().copy()
        agent._polyak(0.0)
        assert np.array_equal(agent.q1_target.get_flat(), before)
        agent._polyak(1.0)
        assert np.array_equal(agent.q1_target.get_flat(), agent.q1.get_flat())
        assert np.array_equal(agent.q1.get_flat(), online_before)

    def test_update_determinism(self, small_cfg):
        def run():
            agent = SacAgent(small_cfg, input_dim=9, seed=5)
            batch = random_batch(np.random.default_rng(3), 16, 9)
            for _ in range(10):
                out = agent.update(batch)
            return agent.policy.trunk.get_flat(), out["q1_loss"]

        f1, l1 = run()
        f2, l2 = run()
        assert np.array_equal(f1, f2)
        assert l1 == l2


class TestReplay:
    def test_provenance_enforced(self):
        buf = ReplayBuffer(10, 9, 2, "delivered")
        buf.add(np.zeros(9), np.zeros(2), 0.0, np.zeros(9), "delivered")
        with pytest.raises(ValueError):
            buf.add(np.zeros(9), np.zeros(2), 0.0, np.zeros(9), "predicted")

    def test_ring_overwrite(self):
        buf = ReplayBuffer(4, 2, 2, "predicted")
        for i in range(10):
            buf.add(np.full(2, i), np.zeros(2), float(i), np.zeros(2), "predicted")
        assert len(buf) == 4
        batch = buf.sample(4, np.random.default_rng(0))
        assert np.all(batch["rewards"] >= 6)

    def test_sample_requires_enough(self):
        buf = ReplayBuffer(10, 2, 2, "delivered")
        buf.add(np.zeros(2), np.zeros(2), 0.0, np.zeros(2), "delivered")
        with pytest.raises(ValueError):
            buf.sample(2, np.random.default_rng(0))

    def test_model_replay_roundtrip(self):
        mr = ModelReplay(8)
        for i in range(3):
            mr.add(np.full(9, i), np.full(3, i), np.full(9, i + 1))
        s, a, n = mr.sample(2, np.random.default_rng(1))
        assert s.shape == (2, 9)
        assert np.all(n[:, 0] == s[:, 0] + 1)
