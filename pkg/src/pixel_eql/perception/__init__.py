"""Frames-to-symbols perception network, its losses and supervised pre-training."""

from __future__ import annotations

from pixel_eql.perception.losses import (
    PerceptionLosses,
    SymbolBatch,
    loss_cnn,
    loss_coor,
    loss_exist,
    loss_size,
    perception_losses,
)
from pixel_eql.perception.network import PerceptionNet, PerceptionOutput
from pixel_eql.perception.pretrain import (
    EpochStats,
    PretrainResult,
    evaluate_perception,
    predict_coords,
    pretrain,
)

__all__ = [
    "EpochStats",
    "PerceptionLosses",
    "PerceptionNet",
    "PerceptionOutput",
    "PretrainResult",
    "SymbolBatch",
    "evaluate_perception",
    "loss_cnn",
    "loss_coor",
    "loss_exist",
    "loss_size",
    "perception_losses",
    "predict_coords",
    "pretrain",
]
