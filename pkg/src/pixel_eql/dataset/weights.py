# pixel_eql/dataset/weights.py
"""
Label weights for the existence loss.

Rare objects get a larger weight: an object's weight in a row is its inverse
frequency normalized over the objects present in that row, pushed through a
sigmoid centred on the mean inverse frequency.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pixel_eql.errors import DegenerateDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelWeights:
    inverse_frequency: np.ndarray  # [C], 0 for never-present objects
    mu: float
    eta: np.ndarray  # same leading shape as the labels, last axis C
    eta_bar: np.ndarray
    alpha: float
    beta: float


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def label_weights(exist: np.ndarray, alpha: float = 0.1, beta: float = 10.0) -> LabelWeights:
    """
    Compute per-entry weights for existence labels ``exist`` (any shape ending in C).

    Each ``(sample, frame)`` pair is one row. Objects that never appear get an
    inverse frequency of 0 and do not count towards the mean.
    Weights lie in the closed interval ``[alpha, alpha + 1]``: far from the
    mean the sigmoid rounds to exactly 0 or 1 in float64.

    Raises:
        DegenerateDataError: if no object is present anywhere.
    """
    labels = np.asarray(exist, dtype=np.float64)
    rows = labels.reshape(-1, labels.shape[-1])
    counts = rows.sum(axis=0)
    present = counts > 0
    if not present.any():
        raise DegenerateDataError("Every existence label is 0; label weights are undefined")

    n = np.zeros_like(counts)
    n[present] = 1.0 / counts[present]
    mu = float(n[present].mean())

    denom = rows @ n
    eta_rows = np.zeros_like(rows)
    nonempty = denom > 0
    eta_rows[nonempty] = n[None, :] / denom[nonempty, None]
    eta = eta_rows.reshape(labels.shape)
    eta_bar = alpha + _sigmoid(beta * (eta - mu))

    missing = np.flatnonzero(~present)
    if missing.size:
        logger.warning("Objects %s never appear; their inverse frequency is 0", missing.tolist())
    return LabelWeights(
        inverse_frequency=n, mu=mu, eta=eta, eta_bar=eta_bar, alpha=alpha, beta=beta
    )
