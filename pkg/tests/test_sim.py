import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telesync.sim import (DeviceState, PDGains, SimConfig, compute_error,
                          local_operator_policy, mix_states, pd_action,
                          reset_episode, step_device)


@pytest.fixture
def cfg():
    return SimConfig()


def make_state(pos=(0, 0, 0), vel=(0, 0, 0), ref=(0, 0, 0)):
    return DeviceState(np.array(pos, float), np.array(vel, float), np.array(ref, float))


class TestStepDevice:
    def test_zero_input_fixed_point(self, cfg):
        s = make_state()
        s2 = step_device(s, np.zeros(3), cfg)
        assert np.array_equal(s2.position, np.zeros(3))
        assert np.array_equal(s2.velocity, np.zeros(3))

    def test_hand_evaluated_euler_update(self):
        cfg = SimConfig(velocity_damping=0.0)
        s2 = step_device(make_state(), np.array([1.0, 0, 0]), cfg)
        assert s2.velocity == pytest.approx([0.01, 0, 0], abs=0)
        assert s2.position == pytest.approx([0.0001, 0, 0], abs=0)

    def test_bound_clamp_zeroes_velocity(self, cfg):
        s = make_state(pos=(1.0, 0, 0))
        s2 = step_device(s, np.array([10.0, 0, 0]), cfg)
        assert s2.position[0] == 1.0
        assert s2.velocity[0] == 0.0

    def test_force_clamped_per_axis(self, cfg):
        s2 = step_device(make_state(), np.array([100.0, 0, 0]), cfg)
        expected_v = (cfg.force_limit / cfg.mass) * cfg.dt
        assert s2.velocity[0] == pytest.approx(expected_v)

    def test_reference_row_unchanged(self, cfg):
        s = make_state(ref=(0.3, -0.2, 0.9))
        s2 = step_device(s, np.array([1.0, 2.0, 3.0]), cfg)
        assert np.array_equal(s2.reference, s.reference)

    def test_nonfinite_force_rejected(self, cfg):
        with pytest.raises(ValueError):
            step_device(make_state(), np.array([np.nan, 0, 0]), cfg)

    def test_zero_damping_conserves_velocity(self):
        cfg = SimConfig(velocity_damping=0.0)
        s = make_state(vel=(0.37, -0.12, 0.05))
        s2 = step_device(s, np.zeros(3), cfg)
        assert np.array_equal(s2.velocity, s.velocity)


class TestMixStates:
    def test_reference_substitution(self):
        remote = make_state(pos=(4, 5, 6), vel=(7, 8, 9), ref=(9, 9, 9))
        local = make_state(pos=(1, 2, 3))
        mixed = mix_states(local, remote)
        assert np.array_equal(mixed.reference, [1, 2, 3])
        assert np.array_equal(mixed.position, remote.position)
        assert np.array_equal(mixed.velocity, remote.velocity)

    def test_idempotent_when_already_mixed(self):
        local = make_state(pos=(0.1, 0.2, 0.3))
        remote = make_state(pos=(4, 5, 6), ref=(0.1, 0.2, 0.3))
        mixed = mix_states(local, remote)
        assert np.array_equal(mixed.observation(), remote.observation())

    def test_inputs_unmodified(self):
        local = make_state(pos=(1, 1, 1))
        remote = make_state(pos=(2, 2, 2), ref=(3, 3, 3))
        before = remote.observation().copy()
        mix_states(local, remote)
        assert np.array_equal(remote.observation(), before)


class TestComputeError:
    def test_coincident_points(self):
        assert compute_error((1, 2, 3), (1, 2, 3)) == 0.0

    def test_pythagorean_triple(self):
        assert compute_error((3, 4, 0), (0, 0, 0)) == pytest.approx(-5.0)

    def test_unit_offset(self):
        assert compute_error((0, 0, 1), (0, 0, 0)) == pytest.approx(-1.0)

    @given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
    def test_symmetric_and_nonpositive(self, xs):
        a, b = np.array(xs[:3]), np.array(xs[3:])
        assert compute_error(a, b) == compute_error(b, a)
        assert compute_error(a, b) <= 0
        if compute_error(a, b) == 0:
            assert np.allclose(a, b)


class TestPdAction:
    def test_zero_gains(self):
        out = pd_action(PDGains(0, 0), np.ones(3), np.zeros(3), 0.01)
        assert np.array_equal(out, np.zeros(3))

    def test_hand_evaluated(self):
        out = pd_action(PDGains(2, 0.5), np.array([1.0, 0, 0]),
                        np.array([0.9, 0, 0]), 0.01)
        assert out == pytest.approx([7.0, 0, 0])

    def test_constant_error_no_derivative(self):
        e = np.array([0.3, 0, 0])
        out = pd_action(PDGains(1, 5), e, e, 0.01)
        assert out == pytest.approx([0.3, 0, 0])

    @given(st.floats(0.1, 40), st.floats(0.1, 9), st.floats(0.1, 5))
    @settings(max_examples=30)
    def test_linear_in_gains(self, kp, kd, lam):
        e = np.array([0.2, -0.4, 0.1])
        ep = np.array([0.1, -0.3, 0.2])
        base = pd_action(PDGains(kp, kd), e, ep, 0.01)
        scaled = pd_action(PDGains(lam * kp, lam * kd), e, ep, 0.01)
        assert scaled == pytest.approx(lam * base)

    def test_negative_gains_rejected(self):
        with pytest.raises(ValueError):
            PDGains(-1.0, 0.0)


class TestLocalOperatorPolicy:
    def test_at_goal_zero_force(self, cfg):
        s = make_state(pos=(0.2, 0.2, 0.2), ref=(0.2, 0.2, 0.2))
        assert np.array_equal(local_operator_policy(s, cfg), np.zeros(3))

    def test_hand_evaluated_gain(self, cfg):
        s = make_state(ref=(0.1, 0, 0))
        assert local_operator_policy(s, cfg) == pytest.approx([2.5, 0, 0])

    def test_saturates_at_force_limit(self, cfg):
        s = make_state(ref=(10.0, 0, 0))
        assert local_operator_policy(s, cfg) == pytest.approx([cfg.force_limit, 0, 0])


class TestResetEpisode:
    def test_same_seed_identical(self, cfg):
        a = reset_episode(123, cfg)
        b = reset_episode(123, cfg)
        for x, y in zip(a, b):
            assert np.array_equal(x.observation(), y.observation())

    def test_different_seeds_differ(self, cfg):
        a = reset_episode(1, cfg)
        b = reset_episode(2, cfg)
        assert not np.array_equal(a[0].reference, b[0].reference)

    def test_colocated_start(self, cfg):
        local, remote = reset_episode(5, cfg)
        assert compute_error(remote.position, local.position) == 0.0
        assert np.array_equal(remote.reference, local.position)

    def test_target_within_bounds(self, cfg):
        for seed in range(50):
            local, _ = reset_episode(seed, cfg)
            assert np.all(np.abs(local.reference) <= cfg.target_bound)


def test_full_episode_determinism(cfg):
    def run():
        local, remote = reset_episode(99, cfg)
        rng = np.random.default_rng(7)
        log = []
        for _ in range(cfg.episode_length):
            f = rng.uniform(-5, 5, 3)
            local = step_device(local, local_operator_policy(local, cfg), cfg)
            remote = step_device(remote, f, cfg)
            log.append(mix_states(local, remote).observation())
        return np.array(log)

    assert np.array_equal(run(), run())


def test_observation_layout():
    s = make_state(pos=(1, 2, 3), vel=(4, 5, 6), ref=(7, 8, 9))
    obs = s.observation()
    assert obs.shape == (9,)
    assert np.array_equal(obs, [1, 2, 3, 4, 5, 6, 7, 8, 9])
    back = DeviceState.from_observation(obs)
    assert np.array_equal(back.observation(), obs)
