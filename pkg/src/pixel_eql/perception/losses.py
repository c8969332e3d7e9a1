# pixel_eql/perception/losses.py
"""
Supervised perception losses.

Coordinate and size losses read the raw head outputs; clipping is applied only
to values handed to the policy and written to disk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from pixel_eql.core.tensor import unit_frames
from pixel_eql.dataset.generate import FrameSymbolDataset
from pixel_eql.perception.network import PerceptionOutput

logger = logging.getLogger(__name__)


@dataclass
class SymbolBatch:
    """Labels for a minibatch, aligned with :class:`PerceptionOutput`."""

    frames: torch.Tensor  # [B, K, S, S] float
    exist: torch.Tensor  # [B, K, C]
    coords: torch.Tensor  # [B, K, C, 2]
    sizes: torch.Tensor  # [B, C, 2], newest frame
    weights: torch.Tensor  # [B, K, C]

    @classmethod
    def from_arrays(
        cls,
        frames: np.ndarray,
        exist: np.ndarray,
        coords: np.ndarray,
        sizes: np.ndarray,
        weights: np.ndarray,
        dtype: torch.dtype = torch.float32,
    ) -> "SymbolBatch":
        """``frames`` may be uint8 gray levels or floats already in [0, 1]."""
        frames_t = torch.as_tensor(np.asarray(frames))
        if frames_t.dtype == torch.uint8:
            frames_t = unit_frames(frames_t, dtype)
        return cls(
            frames=frames_t.to(dtype),
            exist=torch.as_tensor(np.asarray(exist), dtype=dtype),
            coords=torch.as_tensor(np.asarray(coords), dtype=dtype),
            sizes=torch.as_tensor(np.asarray(sizes)[:, -1], dtype=dtype),
            weights=torch.as_tensor(np.asarray(weights), dtype=dtype),
        )

    @classmethod
    def from_dataset(
        cls,
        dataset: FrameSymbolDataset,
        indices: np.ndarray,
        eta_bar: np.ndarray,
        dtype: torch.dtype = torch.float32,
    ) -> "SymbolBatch":
        return cls.from_arrays(
            dataset.frames[indices],
            dataset.exist[indices],
            dataset.coords[indices],
            dataset.sizes[indices],
            eta_bar[indices],
            dtype=dtype,
        )


@dataclass
class PerceptionLosses:
    exist: torch.Tensor
    coor: torch.Tensor
    size: torch.Tensor

    @property
    def total(self) -> torch.Tensor:
        return self.exist + self.coor + self.size


def loss_exist(
    exist_prob: torch.Tensor,
    labels: torch.Tensor,
    weights: torch.Tensor,
    focusing: float = 2.0,
    floor: float = 1e-6,
) -> torch.Tensor:
    """Weighted focal binary cross-entropy, averaged over the batch."""
    p = exist_prob.clamp(floor, 1.0 - floor)
    positive = labels * (1.0 - p) ** focusing * torch.log(p)
    negative = (1.0 - labels) * p**focusing * torch.log(1.0 - p)
    per_sample = -(weights * (positive + negative)).reshape(p.shape[0], -1).sum(dim=1)
    return per_sample.mean()


def loss_coor(coords: torch.Tensor, target: torch.Tensor, exist: torch.Tensor) -> torch.Tensor:
    """L1 distance between predicted and true centres of present objects."""
    err = (coords - target).abs().sum(dim=-1) * exist
    return err.reshape(err.shape[0], -1).sum(dim=1).mean()


def loss_size(sizes: torch.Tensor, target: torch.Tensor, exist: torch.Tensor) -> torch.Tensor:
    """L1 distance between predicted and true sizes of objects present in the newest frame."""
    err = (sizes - target).abs().sum(dim=-1) * exist
    return err.sum(dim=1).mean()


def perception_losses(
    output: PerceptionOutput,
    batch: SymbolBatch,
    focusing: float = 2.0,
    floor: float = 1e-6,
) -> PerceptionLosses:
    return PerceptionLosses(
        exist=loss_exist(output.exist_prob, batch.exist, batch.weights, focusing, floor),
        coor=loss_coor(output.coords_raw, batch.coords, batch.exist),
        size=loss_size(output.sizes_raw, batch.sizes, batch.exist[:, -1]),
    )


def loss_cnn(
    output: PerceptionOutput,
    batch: SymbolBatch,
    focusing: float = 2.0,
    floor: float = 1e-6,
) -> torch.Tensor:
    """Sum of the existence, coordinate and size losses."""
    return perception_losses(output, batch, focusing, floor).total
