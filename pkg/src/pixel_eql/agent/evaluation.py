# pixel_eql/agent/evaluation.py
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import torch

from pixel_eql.agent.actors import Actors, policy_forward
from pixel_eql.config import EnvConfig
from pixel_eql.core.rng import numpy_rng, torch_generator
from pixel_eql.core.tensor import categorical, unit_frames
from pixel_eql.envs.base import make_env
from pixel_eql.errors import ContractError
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)

Mode = Literal["neural", "eql", "random"]


@dataclass
class EvaluationResult:
    mode: str
    episodes: int
    returns: list[float] = field(default_factory=list)
    steps: int = 0
    # Wall-clock policy inference time per step; excluded from deterministic artifacts.
    seconds_per_step: float = 0.0

    @property
    def mean(self) -> float:
        return float(np.mean(self.returns)) if self.returns else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.returns)) if self.returns else float("nan")


def evaluate(
    actors: Optional[Actors],
    perception: Optional[PerceptionNet],
    env_config: EnvConfig,
    episodes: int,
    mode: Mode = "neural",
    greedy: bool = False,
    seed: int = 0,
    threshold: float = 0.5,
) -> EvaluationResult:
    """
    Play ``episodes`` full episodes and collect their returns.

    ``mode`` picks the acting policy: the neural actor, the EQL actor, or
    uniform random actions (no networks needed).

    Raises:
        ContractError: for a non-positive episode count or a missing actor.
    """
    if episodes <= 0:
        raise ContractError("episodes must be positive")
    if mode != "random" and (actors is None or perception is None):
        raise ContractError(f"mode {mode!r} needs a trained agent")
    if mode == "eql" and actors is not None and actors.eql is None:
        raise ContractError("this agent has no EQL actor")
    if mode == "neural" and actors is not None and actors.neural is None:
        raise ContractError("this agent has no neural actor")

    env = make_env(env_config.model_copy(update={"seed": seed}))
    generator = torch_generator(seed, "evaluate")
    rng = numpy_rng(seed, "evaluate")
    dtype = perception.embed[0].weight.dtype if perception is not None else torch.float32
    if perception is not None and actors is not None:
        perception.eval()
        actors.eval()

    result = EvaluationResult(mode=mode, episodes=episodes)
    inference = 0.0
    obs = env.reset(seed=seed)
    for episode in range(episodes):
        total, done = 0.0, False
        while not done:
            if mode == "random":
                action = int(rng.integers(env.n_actions))
            else:
                assert actors is not None and perception is not None
                frames = unit_frames(obs.frames[None], dtype)
                start = time.perf_counter()
                with torch.no_grad():
                    log_probs = policy_forward(actors, perception, frames, threshold).log_probs(mode)[0]
                inference += time.perf_counter() - start
                if greedy:
                    action = int(torch.argmax(log_probs))
                else:
                    action = int(categorical(log_probs.exp().double(), generator))
            step = env.step(action)
            total += step.reward
            result.steps += 1
            done = step.done
            obs = step.observation
        result.returns.append(total)
        logger.debug("episode %s: return %s", episode + 1, total)
        obs = env.reset()
    result.seconds_per_step = inference / max(result.steps, 1)
    return result
