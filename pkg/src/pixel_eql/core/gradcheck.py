# pixel_eql/core/gradcheck.py
"""Central finite differences, the oracle every analytic gradient is tested against."""

from __future__ import annotations

import logging
import math
from typing import Callable, Iterable, Sequence

import numpy as np
import torch

from pixel_eql.errors import ContractError, GradientOracleError

logger = logging.getLogger(__name__)

ScalarFn = Callable[[torch.Tensor], torch.Tensor | float]


def _evaluate(f: ScalarFn, theta: torch.Tensor, index: int) -> float:
    value = float(f(theta))
    if not math.isfinite(value):
        raise GradientOracleError(index, value)
    return value


def finite_difference_grad(
    f: ScalarFn,
    theta: torch.Tensor,
    eps: float = 1e-5,
    indices: Iterable[int] | None = None,
) -> torch.Tensor:
    """
    Estimate ``df/dtheta`` by ``(f(theta + eps e_i) - f(theta - eps e_i)) / (2 eps)``.

    Args:
        f: scalar function of a flat parameter vector.
        theta: point of evaluation (flattened internally, never modified).
        eps: step size, must be positive.
        indices: coordinates to estimate; the others are left at zero. Defaults
            to every coordinate.

    Raises:
        GradientOracleError: if ``f`` is non-finite at a shifted point.
    """
    if eps <= 0:
        raise ContractError("finite-difference step must be positive")
    base = theta.detach().reshape(-1).clone()
    grad = torch.zeros_like(base)
    wanted = range(base.numel()) if indices is None else indices
    with torch.no_grad():
        for i in wanted:
            shifted = base.clone()
            shifted[i] = base[i] + eps
            upper = _evaluate(f, shifted.reshape(theta.shape), i)
            shifted[i] = base[i] - eps
            lower = _evaluate(f, shifted.reshape(theta.shape), i)
            grad[i] = (upper - lower) / (2.0 * eps)
    return grad.reshape(theta.shape)


def relative_error(
    analytic: torch.Tensor, numeric: torch.Tensor, floor: float = 1e-8
) -> float:
    """Max-norm relative error ``|a - n|_inf / max(|a|_inf, |n|_inf, floor)``."""
    diff = float((analytic - numeric).abs().max()) if analytic.numel() else 0.0
    scale = max(
        float(analytic.abs().max()) if analytic.numel() else 0.0,
        float(numeric.abs().max()) if numeric.numel() else 0.0,
        floor,
    )
    return diff / scale


def compare_parameter_gradients(
    loss_fn: Callable[[], torch.Tensor],
    params: Sequence[torch.Tensor],
    eps: float = 1e-5,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """
    Relative error between autograd and finite differences for ``loss_fn``.

    ``params`` are leaf tensors read by ``loss_fn``; they are perturbed in place
    and restored. With ``max_coords`` only a random subset of coordinates is
    perturbed, and the analytic gradient is restricted to the same subset.
    """
    params = list(params)
    loss = loss_fn()
    analytic = torch.cat(
        [g.reshape(-1) for g in torch.autograd.grad(loss, params, allow_unused=True, materialize_grads=True)]
    ).detach()

    flat = torch.cat([p.detach().reshape(-1) for p in params])
    total = flat.numel()
    if max_coords is None or max_coords >= total:
        chosen = np.arange(total)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        chosen = np.sort(rng.choice(total, size=max_coords, replace=False))

    sizes = [p.numel() for p in params]

    def _assign(vector: torch.Tensor) -> None:
        offset = 0
        for p, size in zip(params, sizes):
            p.data.copy_(vector[offset : offset + size].reshape(p.shape))
            offset += size

    def _f(vector: torch.Tensor) -> float:
        _assign(vector)
        return float(loss_fn())

    try:
        numeric = finite_difference_grad(_f, flat, eps=eps, indices=chosen.tolist())
    finally:
        _assign(flat)

    index = torch.as_tensor(chosen, dtype=torch.long)
    return relative_error(analytic[index], numeric[index])
