# pixel_eql/metrics.py
"""Coordinate error metrics over ``[N, K, C, 2]`` predictions."""

from __future__ import annotations

import logging
from typing import Collection, Literal

import numpy as np

from pixel_eql.errors import DimensionError, UndefinedMetricError

logger = logging.getLogger(__name__)

FmaeNormalization = Literal["per_sample", "per_entry"]


def _check(pred: np.ndarray, truth: np.ndarray, exist: np.ndarray) -> None:
    if pred.shape != truth.shape or pred.shape[:-1] != exist.shape or pred.shape[-1] != 2:
        raise DimensionError(
            f"shape mismatch: pred {pred.shape}, truth {truth.shape}, exist {exist.shape}"
        )


def mae(pred: np.ndarray, truth: np.ndarray, exist: np.ndarray) -> float:
    """
    Mean absolute coordinate error over present objects.

    Each sample's masked error sum is divided by ``C*K*2``; the result is the
    mean over samples.
    """
    pred, truth, exist = np.asarray(pred), np.asarray(truth), np.asarray(exist)
    _check(pred, truth, exist)
    n, k, c = exist.shape
    if n == 0:
        raise UndefinedMetricError("MAE over an empty batch")
    err = np.abs(pred - truth).sum(axis=-1) * exist
    return float(err.reshape(n, -1).sum(axis=1).mean() / (c * k * 2))


def f_mae(
    pred: np.ndarray,
    truth: np.ndarray,
    exist: np.ndarray,
    relevant: Collection[int],
    normalization: FmaeNormalization = "per_sample",
) -> float:
    """
    Coordinate error restricted to the objects the policy reads.

    ``E`` counts (sample, frame, object) entries where the object is present and
    relevant. The masked error sum is divided by ``2*E*N*|S|`` or, with
    ``normalization="per_entry"``, by ``2*E*|S|``.

    Raises:
        UndefinedMetricError: if the relevant set is empty or ``E`` is 0.
    """
    pred, truth, exist = np.asarray(pred), np.asarray(truth), np.asarray(exist)
    _check(pred, truth, exist)
    slots = sorted(set(int(j) for j in relevant))
    if not slots:
        raise UndefinedMetricError("F-MAE needs at least one relevant object")
    n, _, c = exist.shape
    selector = np.zeros(c)
    selector[slots] = 1.0
    mask = exist * selector
    entries = float(mask.sum())
    if entries == 0:
        raise UndefinedMetricError("No relevant object is present in the batch")
    total = float((np.abs(pred - truth) * mask[..., None]).sum())
    denom = 2.0 * entries * len(slots)
    if normalization == "per_sample":
        denom *= n
    return total / denom
