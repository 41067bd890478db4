"""Deterministic local-remote device pair.

A 3D force-controlled point-mass end-effector stands in for each robotic
arm. The local device tracks an operator target with a fixed-gain scripted
policy; the remote device is driven by force commands produced by an
adaptive PD controller. State mixing substitutes the local position into
the remote observation's reference row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,) float array

# Scripted operator gains. Chosen so the local device moves briskly but
# without derivative kick; the remote gain scheduler must cover them.
EXPERT_KP = 25.0
EXPERT_KD = 8.0

OBS_DIM = 9  # position(3) + velocity(3) + reference(3)


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> Vec3:
    return np.array([x, y, z], dtype=float)


def _require_finite(v: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} must be finite, got {v!r}")


@dataclass(frozen=True)
class SimConfig:
    """Plant constants for both devices.

    dt and episode_length follow the 10 ms / 50-step experimental setup;
    the remaining constants are desk-scale plant parameters.
    """

    dt: float = 0.01
    episode_length: int = 50
    mass: float = 1.0
    force_limit: float = 10.0
    workspace_half_extent: float = 1.0
    velocity_damping: float = 0.02
    start_half_extent: float = 0.5
    # Operator targets are drawn as an offset from the shared start point so
    # that a well-tuned PD can hold tracking error at the centimeter scale
    # within one 50-step episode (see decisions ledger).
    target_offset: float = 0.2
    target_bound: float = 0.8

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.force_limit <= 0:
            raise ValueError("force_limit must be positive")
        if self.workspace_half_extent <= 0:
            raise ValueError("workspace_half_extent must be positive")
        if not 0.0 <= self.velocity_damping < 1.0:
            raise ValueError("velocity_damping must be in [0, 1)")


@dataclass
class DeviceState:
    """One device's 3x3 state matrix flattened into three labelled rows.

    ``reference`` is the target position for the local device and the
    operator (local) position for the remote device.
    """

    position: Vec3
    velocity: Vec3
    reference: Vec3

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.reference = np.asarray(self.reference, dtype=float)
        for row, name in ((self.position, "position"), (self.velocity, "velocity"),
                          (self.reference, "reference")):
            if row.shape != (3,):
                raise ValueError(f"{name} must have shape (3,)")
            _require_finite(row, name)

    def observation(self) -> np.ndarray:
        """Flatten to the fixed 9-vector row order: position, velocity, reference."""
        return np.concatenate([self.position, self.velocity, self.reference])

    @classmethod
    def from_observation(cls, obs: np.ndarray) -> "DeviceState":
        obs = np.asarray(obs, dtype=float)
        if obs.shape != (OBS_DIM,):
            raise ValueError(f"observation must have shape ({OBS_DIM},)")
        return cls(obs[0:3].copy(), obs[3:6].copy(), obs[6:9].copy())

    def copy(self) -> "DeviceState":
        return DeviceState(self.position.copy(), self.velocity.copy(),
                           self.reference.copy())


@dataclass(frozen=True)
class PDGains:
    kp: float
    kd: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.kp) and np.isfinite(self.kd)):
            raise ValueError("gains must be finite")
        if self.kp < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")


def clamp_force(force: Vec3, cfg: SimConfig) -> Vec3:
    return np.clip(np.asarray(force, dtype=float), -cfg.force_limit, cfg.force_limit)


def step_device(state: DeviceState, force: Vec3, cfg: SimConfig) -> DeviceState:
    """Advance one device by one semi-implicit Euler step.

    The force is clamped per axis, velocity is damped then integrated, and
    the position is clamped to the workspace box with the velocity zeroed on
    any axis that hits a bound. The reference row is left untouched.
    """
    force = np.asarray(force, dtype=float)
    if force.shape != (3,):
        raise ValueError("force must have shape (3,)")
    if not np.all(np.isfinite(force)):
        raise ValueError("force must be finite")

    f = clamp_force(force, cfg)
    v = (1.0 - cfg.velocity_damping) * state.velocity + (f / cfg.mass) * cfg.dt
    p_free = state.position + v * cfg.dt
    bound = cfg.workspace_half_extent
    p = np.clip(p_free, -bound, bound)
    hit = p_free != p
    v = np.where(hit, 0.0, v)
    return DeviceState(p, v, state.reference.copy())


def mix_states(local: DeviceState, remote: DeviceState) -> DeviceState:
    """Substitute the operator's position into the remote reference row.

    Position and velocity rows of the remote state pass through unchanged;
    neither input is modified.
    """
    return DeviceState(remote.position.copy(), remote.velocity.copy(),
                       local.position.copy())


def compute_error(remote_pos: Vec3, local_pos: Vec3) -> float:
    """Negative euclidean distance between the two end-effector positions.

    Serves as both the per-step reward and the tracking-error magnitude;
    always <= 0.
    """
    remote_pos = np.asarray(remote_pos, dtype=float)
    local_pos = np.asarray(local_pos, dtype=float)
    _require_finite(remote_pos, "remote_pos")
    _require_finite(local_pos, "local_pos")
    return -float(np.sqrt(np.sum((remote_pos - local_pos) ** 2)))


def reward_from_observation(obs: np.ndarray) -> float:
    """Reward read off a 9-component observation (position vs reference rows)."""
    obs = np.asarray(obs, dtype=float)
    return compute_error(obs[0:3], obs[6:9])


def pd_action(gains: PDGains, err_vec: Vec3, prev_err_vec: Vec3, dt: float) -> Vec3:
    """PD law on the per-axis error vector (local_pos - remote_pos).

    Derivative uses the backward difference (err - prev_err) / dt; callers
    initialise prev_err_vec to err_vec on the first step so the derivative
    term starts at zero.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    err_vec = np.asarray(err_vec, dtype=float)
    prev_err_vec = np.asarray(prev_err_vec, dtype=float)
    return gains.kp * err_vec + gains.kd * (err_vec - prev_err_vec) / dt


def local_operator_policy(local: DeviceState, cfg: SimConfig) -> Vec3:
    """Scripted expert driving the local device toward its target.

    Fixed-gain PD on (target - position) with velocity damping as the
    derivative term, clamped to the per-axis force limit. Deterministic
    given the state.
    """
    force = EXPERT_KP * (local.reference - local.position) - EXPERT_KD * local.velocity
    return clamp_force(force, cfg)


def reset_episode(seed: int, cfg: SimConfig) -> tuple[DeviceState, DeviceState]:
    """Seeded episode start: co-located devices, freshly drawn operator target.

    Both devices start at the same uniform point in the start box with zero
    velocity. The local target is the start plus a per-axis uniform offset,
    clipped to the target box. Identical seeds give bit-identical episodes.
    """
    rng = np.random.default_rng(seed)
    start = rng.uniform(-cfg.start_half_extent, cfg.start_half_extent, 3)
    offset = rng.uniform(-cfg.target_offset, cfg.target_offset, 3)
    target = np.clip(start + offset, -cfg.target_bound, cfg.target_bound)
    zero = np.zeros(3)
    local = DeviceState(start.copy(), zero.copy(), target)
    remote = DeviceState(start.copy(), zero.copy(), start.copy())
    return local, remote
