# pixel_eql/eql/network.py
"""
Equation-learner network.

Each hidden layer is an affine map followed by a fixed bank of activation
units. With ``r`` repetitions the bank is laid out as

    [square x r, cube x r, constant x r, identity x r, multiply x r, add x r]

so a layer consumes ``d = 8r`` pre-activations (binary units read two
consecutive ones) and emits ``d' = 6r`` values. Constant units have their
weight rows masked to zero, leaving only the bias. The linear output layer
emits ``G`` logits per action; an action's probability is the mass of its
group under one softmax over all logits.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import torch
from torch import nn

from pixel_eql.config import EQLConfig
from pixel_eql.core.tensor import affine, check_finite
from pixel_eql.errors import ConfigError, ContractError, DimensionError

logger = logging.getLogger(__name__)

UNARY: dict[str, Callable[[torch.Tensor], torch.Tensor]] = {
    "square": lambda g: g * g,
    "cube": lambda g: g * g * g,
    "constant": lambda g: g,
    "identity": lambda g: g,
}
BINARY: dict[str, Callable[[torch.Tensor, torch.Tensor], torch.Tensor]] = {
    "multiply": lambda a, b: a * b,
    "add": lambda a, b: a + b,
}


@dataclass(frozen=True)
class ActivationLayout:
    """Contiguous groups of activation units within one layer."""

    unary: tuple[tuple[str, int], ...]  # (function, count)
    binary: tuple[tuple[str, int], ...]

    @classmethod
    def from_config(cls, functions: Sequence[str], repetitions: int) -> "ActivationLayout":
        unknown = [f for f in functions if f not in UNARY and f not in BINARY]
        if unknown:
            raise ConfigError(f"Unknown EQL activation(s): {unknown}")
        return cls(
            unary=tuple((f, repetitions) for f in functions if f in UNARY),
            binary=tuple((f, repetitions) for f in functions if f in BINARY),
        )

    @property
    def n_unary(self) -> int:
        return sum(n for _, n in self.unary)

    @property
    def n_binary(self) -> int:
        return sum(n for _, n in self.binary)

    @property
    def in_dim(self) -> int:
        return self.n_unary + 2 * self.n_binary

    @property
    def out_dim(self) -> int:
        return self.n_unary + self.n_binary

    def units(self) -> Iterator[tuple[str, tuple[int, ...]]]:
        """Yield ``(function, pre-activation indices)`` per output unit, in order."""
        pos = 0
        for name, count in self.unary:
            for _ in range(count):
                yield name, (pos,)
                pos += 1
        for name, count in self.binary:
            for _ in range(count):
                yield name, (pos, pos + 1)
                pos += 2

    def constant_rows(self) -> list[int]:
        return [idx[0] for name, idx in self.units() if name == "constant"]


def activation(g: torch.Tensor, layout: ActivationLayout) -> torch.Tensor:
    """Apply the unit bank to pre-activations ``g[..., d]``, returning ``[..., d']``."""
    if g.shape[-1] != layout.in_dim:
        raise DimensionError(
            f"activation expects {layout.in_dim} pre-activations, got {g.shape[-1]}"
        )
    parts = []
    pos = 0
    for name, count in layout.unary:
        parts.append(UNARY[name](g[..., pos : pos + count]))
        pos += count
    for name, count in layout.binary:
        pairs = g[..., pos : pos + 2 * count]
        parts.append(BINARY[name](pairs[..., 0::2], pairs[..., 1::2]))
        pos += 2 * count
    return torch.cat(parts, dim=-1)


class EQLLayer(nn.Module):
    def __init__(self, in_dim: int, layout: ActivationLayout) -> None:
        super().__init__()
        self.layout = layout
        self.linear = nn.Linear(in_dim, layout.in_dim)
        mask = torch.ones(layout.in_dim, in_dim)
        mask[layout.constant_rows()] = 0.0
        self.register_buffer("mask", mask)
        with torch.no_grad():
            self.linear.weight.mul_(mask)

    @property
    def weight(self) -> torch.Tensor:
        return self.linear.weight * self.mask

    @property
    def bias(self) -> torch.Tensor:
        return self.linear.bias

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return activation(affine(self.weight, self.bias, h), self.layout)


@dataclass
class EQLOutput:
    logits: torch.Tensor  # [B, A*G], temperature applied
    log_probs: torch.Tensor  # [B, A]

    @property
    def probs(self) -> torch.Tensor:
        return self.log_probs.exp()


class EQLNetwork(nn.Module):
    def __init__(self, config: EQLConfig, input_dim: int, n_actions: int) -> None:
        super().__init__()
        self.config = config
        self.input_dim = input_dim
        self.n_actions = n_actions
        self.layout = ActivationLayout.from_config(config.functions, config.repetitions)
        layers = []
        width = input_dim
        for _ in range(config.hidden_layers):
            layers.append(EQLLayer(width, self.layout))
            width = self.layout.out_dim
        self.layers = nn.ModuleList(layers)
        self.output = nn.Linear(width, n_actions * config.logits_per_action)

    @property
    def temperature(self) -> float:
        return self.config.temperature

    @property
    def groups(self) -> int:
        return self.config.logits_per_action

    def logit_names(self, action_names: Sequence[str]) -> list[str]:
        """``logits_{action}{g}`` for each output unit, action-major."""
        if len(action_names) != self.n_actions:
            raise ContractError(f"expected {self.n_actions} action names")
        return [f"logits_{a}{g + 1}" for a in action_names for g in range(self.groups)]

    def forward(self, x: torch.Tensor) -> EQLOutput:
        """
        Raises:
            DimensionError: if the input width is wrong.
            NumericError: naming the first layer whose output is non-finite.
        """
        if x.shape[-1] != self.input_dim:
            raise DimensionError(f"EQL expects {self.input_dim} inputs, got {x.shape[-1]}")
        h = x.to(self.output.weight.dtype)
        for i, layer in enumerate(self.layers):
            h = check_finite(layer(h), f"EQL layer {i + 1}")
        logits = self.temperature * affine(self.output.weight, self.output.bias, h)
        check_finite(logits, "EQL output layer")
        grouped = logits.reshape(*logits.shape[:-1], self.n_actions, self.groups)
        log_probs = torch.logsumexp(grouped, dim=-1) - torch.logsumexp(logits, dim=-1, keepdim=True)
        return EQLOutput(logits=logits, log_probs=log_probs)

    def effective_parameters(self) -> list[torch.Tensor]:
        """Weights as used in the forward pass (constant rows masked) and biases."""
        params: list[torch.Tensor] = []
        for layer in self.layers:
            params += [layer.weight, layer.bias]
        params += [self.output.weight, self.output.bias]
        return params


# ---------------- regularization and pruning ----------------


def reg_value(w: torch.Tensor, a: float = 0.05) -> torch.Tensor:
    """
    Smoothed L0.5 penalty, elementwise.

    ``|w|^0.5`` for ``|w| >= a``; below ``a`` the polynomial
    ``(-w^4/(8a^3) + 3w^2/(4a) + 3a/8)^0.5`` joins it with matching value and slope.
    """
    # Both branches are clamped to their own domain so neither produces NaN
    # gradients where torch.where discards it.
    near = w.clamp(-a, a)
    inner = (-(near**4) / (8 * a**3) + 3 * near**2 / (4 * a) + 3 * a / 8).sqrt()
    outer = w.abs().clamp(min=a).sqrt()
    return torch.where(w.abs() < a, inner, outer)


def reg_loss(net: EQLNetwork, a: float = 0.05) -> torch.Tensor:
    """Sum of :func:`reg_value` over every weight and bias of ``net``."""
    return sum(reg_value(p, a).sum() for p in net.effective_parameters())  # type: ignore[return-value]


def prune(net: EQLNetwork, threshold: float = 0.01) -> EQLNetwork:
    """Copy of ``net`` with every parameter of magnitude below ``threshold`` set to 0."""
    if threshold < 0:
        raise ContractError("prune threshold must be non-negative")
    pruned = copy.deepcopy(net)
    zeroed = 0
    with torch.no_grad():
        for p in pruned.parameters():
            small = p.abs() < threshold
            zeroed += int(small.sum())
            p[small] = 0.0
    logger.debug("Pruned %s parameters below %s", zeroed, threshold)
    return pruned
