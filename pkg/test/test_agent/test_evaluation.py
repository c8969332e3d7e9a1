from __future__ import annotations

import numpy as np
import pytest
import torch

from pixel_eql.agent import Actors, evaluate
from pixel_eql.config import EnvConfig, EQLConfig
from pixel_eql.errors import ContractError
from pixel_eql.perception import PerceptionNet

ENV = EnvConfig(env_id="MiniPong", frame_size=16, frame_stack=2, max_objects=3, max_steps=40)


def test_zero_episodes_is_a_contract_error():
    with pytest.raises(ContractError):
        evaluate(None, None, ENV, episodes=0, mode="random")


def test_trained_modes_need_an_agent():
    with pytest.raises(ContractError, match="trained agent"):
        evaluate(None, None, ENV, episodes=1, mode="eql")


def test_missing_actor_for_mode(tiny_perception_config):
    perception = PerceptionNet(tiny_perception_config, 16, 2, 3)
    actors = Actors("coor_neural", perception.hidden_dim, perception.n_variables, 3, EQLConfig())
    with pytest.raises(ContractError, match="no EQL actor"):
        evaluate(actors, perception, ENV, episodes=1, mode="eql")


def test_random_policy_is_reproducible():
    first = evaluate(None, None, ENV, episodes=3, mode="random", seed=5)
    second = evaluate(None, None, ENV, episodes=3, mode="random", seed=5)
    assert first.returns == second.returns
    assert first.steps == second.steps
    assert len(first.returns) == 3


@pytest.mark.parametrize("mode", ["neural", "eql"])
@pytest.mark.parametrize("greedy", [True, False])
def test_agent_modes_are_reproducible(tiny_perception_config, mode, greedy):
    torch.manual_seed(0)
    perception = PerceptionNet(tiny_perception_config, 16, 2, 3)
    actors = Actors("full", perception.hidden_dim, perception.n_variables, 3, EQLConfig(repetitions=1))
    runs = [evaluate(actors, perception, ENV, episodes=2, mode=mode, greedy=greedy, seed=2) for _ in range(2)]
    assert runs[0].returns == runs[1].returns
    assert runs[0].seconds_per_step >= 0.0


@pytest.mark.slow
def test_random_policy_loses_at_minipong():
    result = evaluate(None, None, EnvConfig(env_id="MiniPong"), episodes=100, mode="random", seed=0)
    assert result.mean < 0
    assert np.isfinite(result.std)
