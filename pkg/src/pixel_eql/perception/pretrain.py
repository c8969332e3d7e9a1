# pixel_eql/perception/pretrain.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from pixel_eql.config import PerceptionConfig
from pixel_eql.core.rng import numpy_rng
from pixel_eql.core.tensor import unit_frames
from pixel_eql.dataset.generate import FrameSymbolDataset
from pixel_eql.dataset.weights import label_weights
from pixel_eql.errors import TrainingDivergedError
from pixel_eql.metrics import mae
from pixel_eql.perception.losses import SymbolBatch, perception_losses
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)

EVAL_BATCH = 256


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    test_loss: float
    test_mae: float
    test_exist_accuracy: float


@dataclass
class PerceptionMetrics:
    loss: float
    mae: float
    exist_accuracy: float


@dataclass
class PretrainResult:
    curve: list[EpochStats] = field(default_factory=list)

    @property
    def final(self) -> Optional[EpochStats]:
        return self.curve[-1] if self.curve else None


def build_optimizer(net: PerceptionNet, config: PerceptionConfig) -> torch.optim.Optimizer:
    return torch.optim.Adam(
        net.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )


def predict_coords(
    net: PerceptionNet, frames: np.ndarray, dtype: torch.dtype = torch.float32
) -> tuple[np.ndarray, np.ndarray]:
    """Clipped coordinates ``[N, K, C, 2]`` and existence probabilities ``[N, K, C]``."""
    coords, probs = [], []
    net.eval()
    with torch.no_grad():
        for start in range(0, len(frames), EVAL_BATCH):
            chunk = unit_frames(frames[start : start + EVAL_BATCH], dtype)
            out = net(chunk)
            coords.append(out.coords.double().numpy())
            probs.append(out.exist_prob.double().numpy())
    return np.concatenate(coords), np.concatenate(probs)


def evaluate_perception(
    net: PerceptionNet,
    dataset: FrameSymbolDataset,
    indices: np.ndarray,
    eta_bar: np.ndarray,
    dtype: torch.dtype = torch.float32,
) -> PerceptionMetrics:
    """Loss, coordinate MAE and existence accuracy on ``indices``."""
    config = net.config
    losses = []
    net.eval()
    with torch.no_grad():
        for start in range(0, len(indices), EVAL_BATCH):
            idx = indices[start : start + EVAL_BATCH]
            batch = SymbolBatch.from_dataset(dataset, idx, eta_bar, dtype)
            out = net(batch.frames)
            total = perception_losses(out, batch, config.focusing, config.prob_floor).total
            losses.append(float(total) * len(idx))
    coords, probs = predict_coords(net, dataset.frames[indices], dtype)
    exist = dataset.exist[indices]
    accuracy = float(((probs >= config.existence_threshold) == (exist == 1)).mean())
    return PerceptionMetrics(
        loss=sum(losses) / max(len(indices), 1),
        mae=mae(coords, dataset.coords[indices], exist),
        exist_accuracy=accuracy,
    )


def pretrain(
    net: PerceptionNet,
    dataset: FrameSymbolDataset,
    config: PerceptionConfig,
    seed: int = 0,
    eta_bar: Optional[np.ndarray] = None,
    alpha: float = 0.1,
    beta: float = 10.0,
    dtype: torch.dtype = torch.float32,
) -> PretrainResult:
    """
    Supervised pre-training on the training split with the combined perception loss.

    ``epochs = 0`` leaves the network untouched. Each epoch ends with an
    evaluation on the test split.

    Raises:
        TrainingDivergedError: if a loss becomes non-finite.
    """
    result = PretrainResult()
    if config.epochs == 0:
        return result
    if eta_bar is None:
        eta_bar = label_weights(dataset.exist, alpha=alpha, beta=beta).eta_bar

    optimizer = build_optimizer(net, config)
    train_idx = dataset.train_idx
    for epoch in range(1, config.epochs + 1):
        order = numpy_rng(seed, "pretrain", epoch).permutation(train_idx)
        net.train()
        running, seen = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            batch = SymbolBatch.from_dataset(dataset, idx, eta_bar, dtype)
            loss = perception_losses(net(batch.frames), batch, config.focusing, config.prob_floor).total
            if not math.isfinite(float(loss)):
                raise TrainingDivergedError(f"Perception loss is {float(loss)} at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            running += float(loss) * len(idx)
            seen += len(idx)

        test = evaluate_perception(net, dataset, dataset.test_idx, eta_bar, dtype)
        stats = EpochStats(
            epoch=epoch,
            train_loss=running / max(seen, 1),
            test_loss=test.loss,
            test_mae=test.mae,
            test_exist_accuracy=test.exist_accuracy,
        )
        result.curve.append(stats)
        logger.info(
            "epoch %s: train %.4f test %.4f mae %.4f exist-acc %.3f",
            epoch, stats.train_loss, stats.test_loss, stats.test_mae, stats.test_exist_accuracy,
        )
    return result
