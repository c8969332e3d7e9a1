from __future__ import annotations

import numpy as np
import pytest
import torch

from pixel_eql.agent import Actors, RolloutCollector, gae, policy_forward
from pixel_eql.config import EnvConfig, EQLConfig
from pixel_eql.core import unit_frames
from pixel_eql.errors import ContractError
from pixel_eql.perception import PerceptionNet

D = torch.float64
ENV = EnvConfig(env_id="MiniPong", frame_size=16, frame_stack=2, max_objects=3, max_steps=20)


def test_gae_zero_rewards_and_values():
    adv, ret = gae(np.zeros((5, 2)), np.zeros((5, 2)), np.zeros((5, 2)), np.zeros(2))
    assert not adv.any() and not ret.any()


def test_gae_single_terminal_step():
    adv, ret = gae(np.array([1.0]), np.array([0.0]), np.array([True]), 5.0)
    assert adv.tolist() == [1.0]
    assert ret.tolist() == [1.0]


def test_gae_without_discount_is_reward_minus_value():
    rewards = np.array([1.0, -2.0, 0.5])
    values = np.array([0.3, 0.1, -0.4])
    adv, ret = gae(rewards, values, np.zeros(3), 9.0, gamma=0.0)
    np.testing.assert_allclose(adv, rewards - values)
    np.testing.assert_allclose(ret, rewards)


def test_gae_bootstraps_from_last_value():
    adv, _ = gae(np.array([0.0]), np.array([0.0]), np.array([False]), 2.0, gamma=0.5)
    assert adv.tolist() == [1.0]


def test_gae_rejects_misaligned_inputs():
    with pytest.raises(ContractError):
        gae(np.zeros(3), np.zeros(2), np.zeros(3), 0.0)


def agent(tiny_perception_config) -> tuple[PerceptionNet, Actors]:
    torch.manual_seed(0)
    perception = PerceptionNet(tiny_perception_config, 16, 2, 3).to(D)
    actors = Actors("full", perception.hidden_dim, perception.n_variables, 3, EQLConfig(repetitions=1)).to(D)
    return perception, actors


def test_collection_is_deterministic(tiny_perception_config):
    perception, actors = agent(tiny_perception_config)
    batches = [RolloutCollector(ENV, 2, seed=4, dtype=D).collect(actors, perception, 40) for _ in range(2)]
    for name in ("frames", "actions", "log_probs", "rewards", "dones", "exist", "coords"):
        np.testing.assert_array_equal(getattr(batches[0], name), getattr(batches[1], name))
    assert batches[0].actions.shape == (20, 2)
    assert batches[0].frames.shape == (20, 2, 2, 16, 16)


def test_stored_log_probs_match_recomputation(tiny_perception_config):
    perception, actors = agent(tiny_perception_config)
    batch = RolloutCollector(ENV, 2, seed=0, dtype=D).collect(actors, perception, 16)
    frames = unit_frames(batch.flatten("frames"), D)
    with torch.no_grad():
        log_probs = policy_forward(actors, perception, frames).log_probs("neural")
    actions = torch.as_tensor(batch.flatten("actions"))
    recomputed = log_probs.gather(-1, actions[:, None]).squeeze(-1).numpy()
    np.testing.assert_allclose(batch.flatten("log_probs"), recomputed, rtol=0, atol=1e-12)


def test_episodes_continue_across_calls_and_finish(tiny_perception_config):
    perception, actors = agent(tiny_perception_config)
    collector = RolloutCollector(ENV, 2, seed=0, dtype=D)
    first = collector.collect(actors, perception, 30)
    second = collector.collect(actors, perception, 30)
    assert first.dones.any() or second.dones.any()
    assert len(first.episode_returns) + len(second.episode_returns) >= 2


@pytest.mark.parametrize("steps", [0, 3])
def test_bad_step_counts(tiny_perception_config, steps):
    perception, actors = agent(tiny_perception_config)
    with pytest.raises(ContractError):
        RolloutCollector(ENV, 2, seed=0, dtype=D).collect(actors, perception, steps)
