from .network import NetworkPlan, NodeSpec, SkipEdge, accuracy, build, forward, loss_and_grad
from .training import (
    Adam,
    DataSplit,
    EpochStats,
    LRSchedule,
    TrainConfig,
    TrainResult,
    averaged_gradient,
    make_shards,
    scaled_hp,
    train,
)

__all__ = [
    "Adam",
    "DataSplit",
    "EpochStats",
    "LRSchedule",
    "NetworkPlan",
    "NodeSpec",
    "SkipEdge",
    "TrainConfig",
    "TrainResult",
    "accuracy",
    "averaged_gradient",
    "build",
    "forward",
    "loss_and_grad",
    "make_shards",
    "scaled_hp",
    "train",
]
