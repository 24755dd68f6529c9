"""Frame-wise dynamics classifier: network, training, and checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig, TrainConfig
from .network import (
    ModelParams,
    UndefinedLossError,
    backward,
    forward,
    init_model,
    masked_cross_entropy,
    parameter_count,
    predict,
)
from .train import EpochStats, build_chunks, train, write_history

__all__ = [
    "EpochStats",
    "ModelConfig",
    "ModelParams",
    "TrainConfig",
    "UndefinedLossError",
    "backward",
    "build_chunks",
    "forward",
    "init_model",
    "load_checkpoint",
    "masked_cross_entropy",
    "parameter_count",
    "predict",
    "save_checkpoint",
    "train",
    "write_history",
]
