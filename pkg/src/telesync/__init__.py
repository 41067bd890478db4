"""TeleSync: delay-corrected adaptive PD teleoperation control."""

__version__ = "0.1.0"

from .sim import (DeviceState, PDGains, SimConfig, compute_error, mix_states,
                  pd_action, local_operator_policy, reset_episode, step_device)
from .delays import (ActionWindow, AugmentedState, DelayLine, augment_state,
                     asac_history_len, pmdc_history_len, verify_delay_equivalence)
from .envloop import DelaySteps, ObsFrame, TeleopPlant, TruthRecord

__all__ = [
    "ActionWindow",
    "AugmentedState",
    "DelayLine",
    "DelaySteps",
    "DeviceState",
    "ObsFrame",
    "PDGains",
    "SimConfig",
    "TeleopPlant",
    "TruthRecord",
    "augment_state",
    "asac_history_len",
    "compute_error",
    "local_operator_policy",
    "mix_states",
    "pd_action",
    "pmdc_history_len",
    "reset_episode",
    "step_device",
    "verify_delay_equivalence",
]
