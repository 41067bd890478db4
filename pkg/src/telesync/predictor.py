"""Future-state prediction for constant action delays.

SBSP keeps a rolling buffer of previously predicted states, adds one new
prediction per decision, and shifts the whole buffer by the observed
prediction error when a delayed observation lands. ABSP is the baseline
that re-rolls the full delay horizon from the freshest observation every
decision. A shared counter makes the call-count and wall-clock comparison
between the two directly measurable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .delays import augment_state
from .sim import OBS_DIM, DeviceState, SimConfig, step_device


class BufferAlignmentError(RuntimeError):
    """Observation step has no matching buffer entry: a delay-accounting bug."""


@dataclass
class PredictionCounter:
    """Ensemble-call and model wall-clock accounting."""

    ensemble_calls_this_episode: int = 0
    total_ensemble_calls: int = 0
    wall_time_model_ns: int = 0
    variance_sum: float = 0.0
    variance_count: int = 0

    def record(self, elapsed_ns: int, variance: float | None = None) -> None:
        self.ensemble_calls_this_episode += 1
        self.total_ensemble_calls += 1
        self.wall_time_model_ns += elapsed_ns
        if variance is not None:
            self.variance_sum += variance
            self.variance_count += 1

    def mean_variance_this_episode(self) -> float:
        if self.variance_count == 0:
            return 0.0
        return self.variance_sum / self.variance_count

    def start_episode(self) -> None:
        self.ensemble_calls_this_episode = 0
        self.variance_sum = 0.0
        self.variance_count = 0


class ReferenceTracker:
    """Dead-reckons the operator position from delivered observations.

    Keeps the last two (step, local position) anchor pairs and extrapolates
    at constant velocity, clamped to the workspace. With a single anchor the
    estimate is a hold.
    """

    def __init__(self, dt: float, bound: float):
        self.dt = dt
        self.bound = bound
        self._curr: tuple[int, np.ndarray] | None = None
        self._prev: tuple[int, np.ndarray] | None = None

    def observe(self, step: int, local_pos: np.ndarray) -> None:
        if self._curr is not None and step <= self._curr[0]:
            return
        self._prev = self._curr
        self._curr = (step, np.asarray(local_pos, dtype=float).copy())

    def estimate(self, step: int) -> np.ndarray:
        if self._curr is None:
            raise RuntimeError("no anchor observed yet")
        s1, p1 = self._curr
        if self._prev is None or step <= s1:
            return p1.copy()
        s0, p0 = self._prev
        vel = (p1 - p0) / ((s1 - s0) * self.dt)
        return np.clip(p1 + vel * (step - s1) * self.dt, -self.bound, self.bound)


class FutureStateBuffer:
    """Contiguous predicted states indexed by absolute plant step."""

    def __init__(self, base_step: int, first_entry: np.ndarray):
        first_entry = np.asarray(first_entry, dtype=float)
        if first_entry.shape != (OBS_DIM,):
            raise ValueError(f"entries must have shape ({OBS_DIM},)")
        self.base_step = base_step
        self.entries: list[np.ndarray] = [first_entry.copy()]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def head_step(self) -> int:
        return self.base_step + len(self.entries) - 1

    def contains(self, step: int) -> bool:
        return self.base_step <= step <= self.head_step

    def entry(self, step: int) -> np.ndarray:
        if not self.contains(step):
            raise BufferAlignmentError(
                f"step {step} outside buffer [{self.base_step}, {self.head_step}]")
        return self.entries[step - self.base_step]

    def append(self, state: np.ndarray) -> None:
        self.entries.append(np.asarray(state, dtype=float).copy())

    def drop_before(self, step: int) -> None:
        while self.base_step < step and len(self.entries) > 1:
            self.entries.pop(0)
            self.base_step += 1


def _model_step(model, state: np.ndarray, force: np.ndarray,
                counter: PredictionCounter | None,
                reference: ReferenceTracker | None,
                target_step: int) -> np.ndarray:
    """One ensemble call plus the dead-reckoned reference row."""
    t0 = time.perf_counter_ns()
    mean, var = model.predict(state, force)
    elapsed = time.perf_counter_ns() - t0
    if counter is not None:
        counter.record(elapsed, float(np.mean(var)))
    mean = np.asarray(mean, dtype=float).copy()
    if reference is not None:
        mean[6:9] = reference.estimate(target_step)
    return mean


def sbsp_init(observed: np.ndarray, observed_step: int,
              in_flight_actions: Sequence[np.ndarray], model,
              counter: PredictionCounter | None = None,
              reference: ReferenceTracker | None = None) -> FutureStateBuffer:
    """Fill the buffer from an observed state through the in-flight actions.

    One ensemble call per in-flight action; at episode start the actions are
    the zero-force initial sequence.
    """
    buf = FutureStateBuffer(observed_step, observed)
    state = buf.entries[0]
    for i, force in enumerate(in_flight_actions):
        state = _model_step(model, state, force, counter, reference,
                            observed_step + i + 1)
        buf.append(state)
    return buf


def sbsp_step(buf: FutureStateBuffer, chosen_action: np.ndarray, model,
              counter: PredictionCounter | None = None,
              reference: ReferenceTracker | None = None) -> np.ndarray:
    """Append the prediction one step past the head; exactly one ensemble call."""
    nxt = _model_step(model, buf.entries[-1], chosen_action, counter, reference,
                      buf.head_step + 1)
    buf.append(nxt)
    return nxt


def sbsp_recalibrate(buf: FutureStateBuffer, observed: np.ndarray,
                     observed_step: int,
                     reference: ReferenceTracker | None = None) -> np.ndarray:
    """Shift every entry at or after the observed step by the prediction error.

    The entry for the observed step is then assigned the observation itself so
    equality is bit-exact, and confirmed older entries are dropped. Returns the
    applied correction.
    """
    observed = np.asarray(observed, dtype=float)
    current = buf.entry(observed_step)  # raises BufferAlignmentError if absent
    delta = observed - current
    for step in range(observed_step, buf.head_step + 1):
        buf.entries[step - buf.base_step] += delta
    if reference is not None:
        for step in range(observed_step, buf.head_step + 1):
            buf.entries[step - buf.base_step][6:9] = reference.estimate(step)
    buf.entries[observed_step - buf.base_step] = observed.copy()
    buf.drop_before(observed_step)
    return delta


def absp_predict(delayed_state: np.ndarray, action_buffer: Sequence[np.ndarray],
                 model, counter: PredictionCounter | None = None,
                 reference: ReferenceTracker | None = None,
                 base_step: int = 0) -> np.ndarray:
    """Re-roll the full horizon from the delayed state; one call per action."""
    state = np.asarray(delayed_state, dtype=float).copy()
    for i, force in enumerate(action_buffer):
        state = _model_step(model, state, force, counter, reference,
                            base_step + i + 1)
    return state


def pmdc_observe(buf: FutureStateBuffer, step: int,
                 history: Sequence[np.ndarray], n: int):
    """Agent input: the predicted state for ``step`` plus the stochastic-range
    action history."""
    return augment_state(buf.entry(step), history, n)


class OracleDynamics:
    """True plant transition exposed through the ensemble interface.

    Steps the remote device's rows with the real simulator and holds the
    reference row; variance is identically zero. For verification only, and
    only exact while the operator is stationary.
    """

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg

    def predict(self, state: np.ndarray, action: np.ndarray):
        device = DeviceState.from_observation(state)
        nxt = step_device(device, np.asarray(action, dtype=float), self.cfg)
        return nxt.observation(), np.zeros(OBS_DIM)


_OBS_COMPONENTS = [f"{row}_{axis}" for row in ("pos", "vel", "ref")
                   for axis in "xyz"]


class PredictionTrace:
    """Horizon predictions paired with their later-arriving observations.

    Call note() with each head prediction and feed() with every delivered
    frame; rows pair up by plant step for offline accuracy analysis.
    """

    COLUMNS = (["step"]
               + [f"predicted_{c}" for c in _OBS_COMPONENTS]
               + [f"observed_{c}" for c in _OBS_COMPONENTS]
               + [f"delta_{c}" for c in _OBS_COMPONENTS])

    def __init__(self):
        self._predicted: dict[int, np.ndarray] = {}
        self._observed: dict[int, np.ndarray] = {}

    def note(self, step: int, predicted: np.ndarray) -> None:
        self._predicted.setdefault(step, np.asarray(predicted, dtype=float).copy())

    def feed(self, step: int, observed: np.ndarray) -> None:
        self._observed[step] = np.asarray(observed, dtype=float).copy()

    def rows(self) -> list[list]:
        out = []
        for step in sorted(self._predicted):
            if step not in self._observed:
                continue
            pred = self._predicted[step]
            obs = self._observed[step]
            out.append([step, *pred, *obs, *(pred - obs)])
        return out

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in self.rows():
                writer.writerow([row[0]] + [f"{v:.10f}" for v in row[1:]])
