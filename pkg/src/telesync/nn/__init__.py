from .autodiff import Tensor, concat, minimum, where_const
from .ensemble import EnsembleConfig, EnsembleModel, NormScales, ensemble_predict, ensemble_train
from .mlp import Adam, Mlp, adam_step, huber_loss

__all__ = [
    "Adam",
    "EnsembleConfig",
    "EnsembleModel",
    "Mlp",
    "NormScales",
    "Tensor",
    "adam_step",
    "concat",
    "ensemble_predict",
    "ensemble_train",
    "huber_loss",
    "minimum",
    "where_const",
]
