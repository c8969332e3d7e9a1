# pixel_eql/agent/actors.py
"""
The actors trained together under PPO.

- A neural actor on the perception hidden vector (or, for the coordinate-only
  ablation, on the masked coordinates).
- A critic on the hidden vector.
- The EQL actor on the masked coordinates.

Which actor picks actions during rollouts depends on the variant: the EQL
actor when neural guidance is off, the neural one otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import torch
from torch import nn

from pixel_eql.config import EQLConfig, Variant
from pixel_eql.eql.network import EQLNetwork
from pixel_eql.errors import ContractError
from pixel_eql.perception.network import PerceptionNet, PerceptionOutput

logger = logging.getLogger(__name__)


def _mlp(in_dim: int, hidden: int, out_dim: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, hidden),
        nn.Tanh(),
        nn.Linear(hidden, hidden),
        nn.Tanh(),
        nn.Linear(hidden, out_dim),
    )


class NeuralActor(nn.Module):
    def __init__(self, in_dim: int, hidden: int, n_actions: int) -> None:
        super().__init__()
        self.net = _mlp(in_dim, hidden, n_actions)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Action log-probabilities."""
        return torch.log_softmax(self.net(x), dim=-1)


class Critic(nn.Module):
    def __init__(self, in_dim: int, hidden: int) -> None:
        super().__init__()
        self.net = _mlp(in_dim, hidden, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x).squeeze(-1)


class Actors(nn.Module):
    def __init__(
        self,
        variant: Variant,
        hidden_dim: int,
        n_variables: int,
        n_actions: int,
        eql_config: EQLConfig,
        actor_hidden: int = 64,
    ) -> None:
        super().__init__()
        self.variant = variant
        self.n_actions = n_actions
        self.neural: Optional[NeuralActor] = None
        self.eql: Optional[EQLNetwork] = None
        if variant != "no_ng":
            in_dim = n_variables if variant == "coor_neural" else hidden_dim
            self.neural = NeuralActor(in_dim, actor_hidden, n_actions)
        if variant != "coor_neural":
            self.eql = EQLNetwork(eql_config, n_variables, n_actions)
        self.critic = Critic(hidden_dim, actor_hidden)

    @property
    def acting(self) -> str:
        return "eql" if self.variant == "no_ng" else "neural"

    @property
    def uses_guidance(self) -> bool:
        return self.neural is not None and self.eql is not None


@dataclass
class PolicyOutputs:
    perception: PerceptionOutput
    coords: torch.Tensor  # [B, V] masked policy input
    values: torch.Tensor  # [B]
    neural_log_probs: Optional[torch.Tensor]  # [B, A]
    eql_log_probs: Optional[torch.Tensor]  # [B, A]

    def log_probs(self, actor: str) -> torch.Tensor:
        chosen = self.eql_log_probs if actor == "eql" else self.neural_log_probs
        if chosen is None:
            raise ContractError(f"No {actor} actor in this agent")
        return chosen


def policy_forward(
    actors: Actors,
    perception: PerceptionNet,
    frames: torch.Tensor,
    threshold: float = 0.5,
) -> PolicyOutputs:
    """Run perception once and every actor on its output."""
    out = perception(frames)
    coords = out.masked_coords(threshold)
    neural = None
    if actors.neural is not None:
        neural = actors.neural(coords if actors.variant == "coor_neural" else out.hidden)
    eql = actors.eql(coords).log_probs if actors.eql is not None else None
    return PolicyOutputs(
        perception=out,
        coords=coords,
        values=actors.critic(out.hidden),
        neural_log_probs=neural,
        eql_log_probs=eql,
    )
