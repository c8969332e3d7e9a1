# pixel_eql/agent/losses.py
"""
Policy-learning objectives.

Every inner iteration but the last optimizes the clipped PPO objective alone.
The last one adds neural guidance, the EQL sparsity penalty and the
perception loss:

    L = L_ppo + L_ng + lambda_reg * L_reg + lambda_cnn * L_cnn

Ablation variants drop the terms they have no component for.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import torch

from pixel_eql.agent.actors import Actors, PolicyOutputs, policy_forward
from pixel_eql.config import EQLConfig, PerceptionConfig, PPOConfig
from pixel_eql.core.tensor import entropy
from pixel_eql.eql.network import reg_loss
from pixel_eql.errors import ContractError
from pixel_eql.perception.losses import SymbolBatch, loss_cnn
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)


@dataclass
class Minibatch:
    frames: torch.Tensor  # [B, K, S, S] float
    actions: torch.Tensor  # [B] long
    old_log_probs: torch.Tensor  # [B]
    advantages: torch.Tensor  # [B], already normalized if requested
    returns: torch.Tensor  # [B]


@dataclass
class PPOTerms:
    loss: torch.Tensor
    policy: torch.Tensor
    value: torch.Tensor
    entropy: torch.Tensor
    approx_kl: float
    clip_fraction: float


@dataclass
class LossTerms:
    total: torch.Tensor
    ppo: PPOTerms
    ng: Optional[torch.Tensor] = None
    reg: Optional[torch.Tensor] = None
    cnn: Optional[torch.Tensor] = None
    extras: dict[str, float] = field(default_factory=dict)

    def as_floats(self) -> dict[str, float]:
        def _f(t: Optional[torch.Tensor]) -> float:
            return float("nan") if t is None else float(t.detach())

        return {
            "loss_total": _f(self.total),
            "loss_ppo": _f(self.ppo.loss),
            "loss_ng": _f(self.ng),
            "loss_reg": _f(self.reg),
            "loss_cnn": _f(self.cnn),
            "entropy": _f(self.ppo.entropy),
            "approx_kl": self.ppo.approx_kl,
            "clip_fraction": self.ppo.clip_fraction,
        }


def ppo_objective(
    log_probs: torch.Tensor,
    values: torch.Tensor,
    minibatch: Minibatch,
    clip_eps: float = 0.1,
    vf_coef: float = 0.5,
    ent_coef: float = 0.01,
) -> PPOTerms:
    """
    Clipped surrogate plus value and entropy terms.

    ``log_probs`` holds the current log-probabilities of every action ``[B, A]``.
    """
    new = log_probs.gather(-1, minibatch.actions.unsqueeze(-1)).squeeze(-1)
    log_ratio = new - minibatch.old_log_probs
    ratio = log_ratio.exp()
    adv = minibatch.advantages
    surrogate = torch.max(-adv * ratio, -adv * ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps)).mean()
    value = 0.5 * ((values - minibatch.returns) ** 2).mean()
    mean_entropy = entropy(log_probs.exp()).mean()
    with torch.no_grad():
        approx_kl = float(((ratio - 1.0) - log_ratio).mean())
        clip_fraction = float(((ratio - 1.0).abs() > clip_eps).to(ratio.dtype).mean())
    return PPOTerms(
        loss=surrogate - ent_coef * mean_entropy + vf_coef * value,
        policy=surrogate,
        value=value,
        entropy=mean_entropy,
        approx_kl=approx_kl,
        clip_fraction=clip_fraction,
    )


def ppo_loss(
    actors: Actors,
    perception: PerceptionNet,
    minibatch: Minibatch,
    config: PPOConfig,
    threshold: float = 0.5,
) -> torch.Tensor:
    """PPO loss of the acting actor on ``minibatch``."""
    outputs = policy_forward(actors, perception, minibatch.frames, threshold)
    return ppo_objective(
        outputs.log_probs(actors.acting),
        outputs.values,
        minibatch,
        config.clip_eps,
        config.vf_coef,
        config.ent_coef,
    ).loss


def ng_loss(neural_probs: torch.Tensor, eql_log_probs: torch.Tensor) -> torch.Tensor:
    """
    Cross-entropy ``-sum pi_neural ln pi_eql``, averaged over the batch.

    The neural distribution is a fixed target: no gradient flows into it.
    """
    if neural_probs.shape != eql_log_probs.shape:
        raise ContractError("neural and EQL distributions differ in shape")
    target = neural_probs.detach()
    return -(target * eql_log_probs).sum(dim=-1).mean()


def anneal(lambda_init: float, update: int, total_updates: int) -> float:
    """Sparsity weight for update ``update`` (1-based): grows linearly from 0.

    ``update == total_updates + 1`` is the state after training and gives ``lambda_init``.
    """
    if total_updates <= 0 or not 1 <= update <= total_updates + 1:
        raise ContractError(f"update {update} outside 1..{total_updates + 1}")
    return lambda_init * (update - 1) / total_updates


def compute_losses(
    actors: Actors,
    perception: PerceptionNet,
    minibatch: Minibatch,
    *,
    ppo: PPOConfig,
    eql: EQLConfig,
    perception_config: PerceptionConfig,
    lambda_reg: float,
    joint: bool,
    symbol_batch: Optional[SymbolBatch] = None,
    train_perception: bool = True,
) -> LossTerms:
    """
    The objective for one minibatch.

    With ``joint`` set, guidance, sparsity and perception terms are added for
    the components this agent has; perception supervision also needs
    ``symbol_batch`` and a trainable perception network.
    """
    threshold = perception_config.existence_threshold
    outputs: PolicyOutputs = policy_forward(actors, perception, minibatch.frames, threshold)
    terms = ppo_objective(
        outputs.log_probs(actors.acting),
        outputs.values,
        minibatch,
        ppo.clip_eps,
        ppo.vf_coef,
        ppo.ent_coef,
    )
    result = LossTerms(total=terms.loss, ppo=terms)
    if not joint:
        return result

    total = terms.loss
    if actors.uses_guidance:
        assert outputs.neural_log_probs is not None and outputs.eql_log_probs is not None
        result.ng = ng_loss(outputs.neural_log_probs.exp(), outputs.eql_log_probs)
        total = total + result.ng
    if actors.eql is not None:
        result.reg = reg_loss(actors.eql, eql.reg_smoothing)
        total = total + lambda_reg * result.reg
    if symbol_batch is not None and train_perception:
        result.cnn = loss_cnn(
            perception(symbol_batch.frames),
            symbol_batch,
            perception_config.focusing,
            perception_config.prob_floor,
        )
        total = total + ppo.lambda_cnn * result.cnn
    result.total = total
    return result
