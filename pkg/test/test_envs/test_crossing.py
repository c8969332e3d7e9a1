from __future__ import annotations

import numpy as np

from pixel_eql.config import EnvConfig
from pixel_eql.envs import make_env
from pixel_eql.envs.crossing import AGENT_COLUMN, START_ROW, MiniCrossing, lane_rows


def crossing(**overrides) -> MiniCrossing:
    env = make_env(EnvConfig(env_id="MiniCrossing", **overrides))
    assert isinstance(env, MiniCrossing)
    return env


def test_lane_rows():
    assert lane_rows(7) == [2, 3, 5, 7, 9, 11, 13]
    assert lane_rows(1) == [7]


def test_reset_has_absent_cars():
    env = crossing(max_objects=8)
    obs = env.reset(seed=0)
    exist = obs.symbols[-1].exist
    assert exist[0] == 1
    assert exist[1:].min() == 0
    assert env.object_names == ("agent",) + tuple(f"car{k}" for k in range(1, 8))


def test_reaching_far_side_pays_and_resets():
    env = crossing()
    env.reset(seed=0)
    env.agent_y = 1
    result = env.step(1)
    assert result.reward == 1.0
    assert env.agent_y == START_ROW


def test_collision_sends_agent_back():
    env = crossing(max_objects=8)
    env.reset(seed=0)
    env.agent_y = 3
    env.cars[0] = AGENT_COLUMN - 1
    result = env.step(1)
    assert result.reward == 0.0
    assert env.agent_y == START_ROW


def test_busy_lane_is_present_far_more_often():
    env = crossing(max_objects=3, spawn_rate=0.3, spawn_skew=10.0)
    env.reset(seed=0)
    present = np.zeros(3)
    for _ in range(2000):
        present += env.step(0).observation.symbols[-1].exist
    assert present[1] > 2 * present[2]


def test_seeded_reset_restarts_the_stream():
    env = crossing()
    env.reset(seed=5)
    first = [env.step(0).observation.frames[-1] for _ in range(50)]
    env.reset(seed=5)
    second = [env.step(0).observation.frames[-1] for _ in range(50)]
    assert all(np.array_equal(a, b) for a, b in zip(first, second))
