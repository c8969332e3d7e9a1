# pixel_eql/agent/rollout.py
"""Vectorized experience collection and generalized advantage estimation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from pixel_eql.agent.actors import Actors, policy_forward
from pixel_eql.config import EnvConfig
from pixel_eql.core.rng import torch_generator
from pixel_eql.core.tensor import categorical, log_prob, unit_frames
from pixel_eql.envs.base import GridEnv, Observation, make_env
from pixel_eql.errors import ContractError
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)


@dataclass
class RolloutBatch:
    """``T`` steps from ``E`` environments; arrays are ``[T, E, ...]``."""

    frames: np.ndarray  # uint8 [T, E, K, S, S]
    actions: np.ndarray  # int64
    log_probs: np.ndarray  # behavior log-prob of the taken action
    rewards: np.ndarray  # includes the truncation bootstrap
    values: np.ndarray
    dones: np.ndarray  # episode ended after this step
    exist: np.ndarray  # oracle symbols of the observed frames
    coords: np.ndarray
    sizes: np.ndarray
    pred_coords: np.ndarray  # clipped perception output at collection time
    last_values: np.ndarray  # [E] value of the state after the last step
    episode_returns: list[float] = field(default_factory=list)
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return int(self.actions.size)

    def flatten(self, name: str) -> np.ndarray:
        array = getattr(self, name)
        return array.reshape(-1, *array.shape[2:])


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_values: np.ndarray | float,
    gamma: float = 0.99,
    lam: float = 0.95,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimates and returns for ``[T, ...]`` arrays.

    ``dones[t]`` stops bootstrapping from step ``t + 1``; truncated episodes are
    expected to carry their bootstrap value in the reward already.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise ContractError("rewards, values and dones must share a shape")
    advantages = np.zeros_like(rewards)
    running = np.zeros_like(rewards[0]) if rewards.size else 0.0
    for t in reversed(range(rewards.shape[0])):
        next_value = np.asarray(last_values, dtype=np.float64) if t == rewards.shape[0] - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        advantages[t] = running
    return advantages, advantages + values


def normalize(advantages: np.ndarray) -> np.ndarray:
    std = advantages.std()
    return (advantages - advantages.mean()) / (std + 1e-8)


class RolloutCollector:
    """Steps ``n_envs`` environments in lockstep, keeping episodes running across calls."""

    def __init__(
        self,
        env_config: EnvConfig,
        n_envs: int,
        seed: int,
        gamma: float = 0.99,
        threshold: float = 0.5,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        self.envs: list[GridEnv] = [
            make_env(env_config.model_copy(update={"seed": seed + i})) for i in range(n_envs)
        ]
        self.observations: list[Observation] = [
            env.reset(seed=seed + i) for i, env in enumerate(self.envs)
        ]
        self.running_returns = np.zeros(n_envs)
        self.generator = torch_generator(seed, "rollout")
        self.gamma = gamma
        self.threshold = threshold
        self.dtype = dtype

    @property
    def n_envs(self) -> int:
        return len(self.envs)

    def _frames(self, observations: list[Observation]) -> torch.Tensor:
        stacked = np.stack([o.frames for o in observations])
        return unit_frames(stacked, self.dtype)

    @torch.no_grad()
    def _values(self, actors: Actors, perception: PerceptionNet, observations: list[Observation]) -> np.ndarray:
        hidden = perception(self._frames(observations)).hidden
        return actors.critic(hidden).double().numpy()

    @torch.no_grad()
    def collect(self, actors: Actors, perception: PerceptionNet, steps: int) -> RolloutBatch:
        """
        Collect ``steps`` transitions in total, split evenly across environments.

        Raises:
            ContractError: if ``steps`` is not a positive multiple of ``n_envs``.
        """
        if steps <= 0:
            raise ContractError("cannot collect an empty batch")
        if steps % self.n_envs:
            raise ContractError(f"steps ({steps}) must be a multiple of n_envs ({self.n_envs})")
        horizon = steps // self.n_envs
        was_training = perception.training, actors.training
        perception.eval()
        actors.eval()

        records: dict[str, list[np.ndarray]] = {
            k: [] for k in ("frames", "actions", "log_probs", "rewards", "values", "dones", "exist", "coords", "sizes", "pred_coords")
        }
        finished: list[float] = []
        for _ in range(horizon):
            frames = self._frames(self.observations)
            outputs = policy_forward(actors, perception, frames, self.threshold)
            log_probs = outputs.log_probs(actors.acting)
            actions = categorical(log_probs.exp().double(), self.generator)
            taken = log_prob(log_probs.exp(), actions)

            rewards = np.zeros(self.n_envs)
            dones = np.zeros(self.n_envs, dtype=bool)
            truncated_final: dict[int, Observation] = {}
            next_obs: list[Observation] = []
            for i, (env, action) in enumerate(zip(self.envs, actions.tolist())):
                result = env.step(action)
                rewards[i] = result.reward
                self.running_returns[i] += result.reward
                if result.done:
                    dones[i] = True
                    finished.append(float(self.running_returns[i]))
                    self.running_returns[i] = 0.0
                    if result.truncated:
                        truncated_final[i] = result.observation
                    next_obs.append(env.reset())
                else:
                    next_obs.append(result.observation)
            if truncated_final:
                boot = self._values(actors, perception, list(truncated_final.values()))
                for i, v in zip(truncated_final, boot):
                    rewards[i] += self.gamma * v

            symbols = [o.symbol_arrays() for o in self.observations]
            records["frames"].append(np.stack([o.frames for o in self.observations]))
            records["actions"].append(actions.numpy().astype(np.int64))
            records["log_probs"].append(taken.double().numpy())
            records["rewards"].append(rewards)
            records["values"].append(outputs.values.double().numpy())
            records["dones"].append(dones)
            records["exist"].append(np.stack([s[0] for s in symbols]))
            records["coords"].append(np.stack([s[1] for s in symbols]))
            records["sizes"].append(np.stack([s[2] for s in symbols]))
            records["pred_coords"].append(outputs.perception.coords.double().numpy())
            self.observations = next_obs

        last_values = self._values(actors, perception, self.observations)
        if was_training[0]:
            perception.train()
        if was_training[1]:
            actors.train()
        return RolloutBatch(
            **{k: np.stack(v) for k, v in records.items()},
            last_values=last_values,
            episode_returns=finished,
        )
