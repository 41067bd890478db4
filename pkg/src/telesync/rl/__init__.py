from .replay import ModelReplay, ReplayBuffer
from .sac import GaussianPolicy, SacAgent, SacConfig, map_gains

__all__ = [
    "GaussianPolicy",
    "ModelReplay",
    "ReplayBuffer",
    "SacAgent",
    "SacConfig",
    "map_gains",
]
