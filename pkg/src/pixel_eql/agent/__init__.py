"""PPO training of the neural and EQL actors, evaluation and coordinate metrics."""

from __future__ import annotations

from pixel_eql.agent.actors import Actors, Critic, NeuralActor, PolicyOutputs, policy_forward
from pixel_eql.agent.evaluation import EvaluationResult, evaluate
from pixel_eql.agent.losses import (
    LossTerms,
    Minibatch,
    anneal,
    compute_losses,
    ng_loss,
    ppo_loss,
    ppo_objective,
)
from pixel_eql.agent.persistence import load_agent, save_agent
from pixel_eql.agent.rollout import RolloutBatch, RolloutCollector, gae
from pixel_eql.agent.trainer import TrainResult, Trainer, UpdateLog, build_actors, train
from pixel_eql.metrics import f_mae, mae

__all__ = [
    "Actors",
    "Critic",
    "EvaluationResult",
    "LossTerms",
    "Minibatch",
    "NeuralActor",
    "PolicyOutputs",
    "RolloutBatch",
    "RolloutCollector",
    "TrainResult",
    "Trainer",
    "UpdateLog",
    "anneal",
    "build_actors",
    "compute_losses",
    "evaluate",
    "f_mae",
    "gae",
    "load_agent",
    "mae",
    "ng_loss",
    "policy_forward",
    "ppo_loss",
    "ppo_objective",
    "save_agent",
    "train",
]
