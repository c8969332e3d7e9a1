# pixel_eql/core/tensor.py
"""
Differentiable primitives shared by every model in the package.

Tensors are ``torch.Tensor`` values and the autograd graph is the gradient
tape: each primitive below records its backward rule on it, and
:func:`gradients` replays the tape for a scalar output. Tests run in double
precision; training may use single precision.
"""

from __future__ import annotations

import logging
from typing import Sequence

import torch

from pixel_eql.errors import ContractError, DimensionError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = torch.float64
DISTRIBUTION_TOLERANCE = 1e-6


def check_finite(tensor: torch.Tensor, what: str = "tensor") -> torch.Tensor:
    """Raise NumericError if ``tensor`` holds NaN or Inf; otherwise return it unchanged."""
    if not bool(torch.isfinite(tensor).all()):
        raise NumericError(f"Non-finite values in {what}")
    return tensor


def unit_frames(frames, dtype: torch.dtype = DEFAULT_DTYPE) -> torch.Tensor:
    """uint8 gray levels (array or tensor) as ``dtype`` values in [0, 1]."""
    tensor = torch.as_tensor(frames)
    if tensor.dtype != torch.uint8:
        raise ContractError(f"frames must be uint8 gray levels, got {tensor.dtype}")
    return tensor.to(dtype) / 255.0


def affine(W: torch.Tensor, b: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    """
    Compute ``W @ x + b``.

    ``x`` may carry leading batch dimensions; the last one must equal the number
    of columns of ``W``.

    Raises:
        DimensionError: if the shapes do not conform.
    """
    if W.dim() != 2:
        raise DimensionError(f"affine expects a matrix, got shape {tuple(W.shape)}")
    m, n = W.shape
    if b.shape != (m,):
        raise DimensionError(f"bias shape {tuple(b.shape)} does not match {m} rows")
    if x.dim() == 0 or x.shape[-1] != n:
        raise DimensionError(f"input shape {tuple(x.shape)} does not match {n} columns")
    return torch.nn.functional.linear(x, W, b)


def softmax(logits: torch.Tensor, dim: int = -1) -> torch.Tensor:
    """Numerically stable softmax along ``dim``."""
    if logits.dim() == 0 or logits.shape[dim] == 0:
        raise DimensionError("softmax of an empty vector is undefined")
    return torch.softmax(logits, dim=dim)


def _validate_distribution(probs: torch.Tensor) -> None:
    if probs.dim() == 0 or probs.shape[-1] == 0:
        raise DimensionError("empty probability vector")
    if bool((probs < 0).any()):
        raise ContractError("probabilities must be non-negative")
    totals = probs.sum(dim=-1)
    if bool(((totals - 1.0).abs() > DISTRIBUTION_TOLERANCE).any()):
        raise ContractError(
            f"probabilities must sum to 1 within {DISTRIBUTION_TOLERANCE}, got {totals.tolist()}"
        )


def categorical(probs: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """
    Sample action indices from ``probs`` (shape ``[A]`` or ``[B, A]``).

    Raises:
        ContractError: if ``probs`` is not a valid distribution.
    """
    _validate_distribution(probs)
    flat = probs.reshape(-1, probs.shape[-1]).detach()
    draws = torch.multinomial(flat, 1, generator=generator).squeeze(-1)
    return draws.reshape(probs.shape[:-1])


def log_prob(probs: torch.Tensor, action: torch.Tensor | int) -> torch.Tensor:
    """``ln probs[action]``, batched over leading dimensions."""
    _validate_distribution(probs)
    index = torch.as_tensor(action, dtype=torch.long)
    if probs.dim() == 1:
        return torch.log(probs[index])
    return torch.log(probs.gather(-1, index.unsqueeze(-1)).squeeze(-1))


def entropy(probs: torch.Tensor) -> torch.Tensor:
    """Shannon entropy ``-sum p ln p`` with ``0 ln 0 = 0``."""
    _validate_distribution(probs)
    return -torch.special.xlogy(probs, probs).sum(dim=-1)


class _Clip01(torch.autograd.Function):
    """Clamp to [0, 1]; the gradient passes only strictly inside the interval."""

    @staticmethod
    def forward(ctx, x: torch.Tensor) -> torch.Tensor:  # type: ignore[override]
        ctx.save_for_backward(x)
        return x.clamp(0.0, 1.0)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor) -> torch.Tensor:  # type: ignore[override]
        (x,) = ctx.saved_tensors
        inside = (x > 0.0) & (x < 1.0)
        return grad_output * inside.to(grad_output.dtype)


def clip01(x: torch.Tensor) -> torch.Tensor:
    """Elementwise ``min(max(x, 0), 1)``. Gradient is zero at and beyond the bounds."""
    return _Clip01.apply(x)


def gradients(
    output: torch.Tensor, params: Sequence[torch.Tensor], retain_graph: bool = False
) -> list[torch.Tensor]:
    """
    Replay the autograd tape of a scalar ``output``.

    Returns one gradient per parameter, shaped like the parameter. Parameters
    the output does not depend on get a zero tensor.
    """
    if output.numel() != 1:
        raise DimensionError("gradients() needs a scalar output")
    grads = torch.autograd.grad(
        output, list(params), retain_graph=retain_graph, allow_unused=True
    )
    return [
        torch.zeros_like(p) if g is None else g for p, g in zip(params, grads)
    ]
