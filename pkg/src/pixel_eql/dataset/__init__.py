"""Frame/symbol datasets: generation, label weights and the on-disk format."""

from __future__ import annotations

from pixel_eql.dataset.generate import FrameSymbolDataset, generate, split_indices
from pixel_eql.dataset.storage import SCHEMA, load, save
from pixel_eql.dataset.weights import LabelWeights, label_weights

__all__ = [
    "FrameSymbolDataset",
    "LabelWeights",
    "SCHEMA",
    "generate",
    "label_weights",
    "load",
    "save",
    "split_indices",
]
