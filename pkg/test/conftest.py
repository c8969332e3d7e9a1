from __future__ import annotations

import os

import pytest

from pixel_eql.config import clear_config_cache


def pytest_collection_modifyitems(config, items):
    if os.environ.get("PIXEL_EQL_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set PIXEL_EQL_RUN_SLOW=1 to run acceptance-scale tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _fresh_config_cache():
    clear_config_cache()
    yield
    clear_config_cache()


TINY_CONV = [
    {"kernel": 3, "stride": 2, "padding": 1, "channels": 4},
    {"kernel": 3, "stride": 2, "padding": 1, "channels": 4},
]


@pytest.fixture
def tiny_perception_config():
    from pixel_eql.config import PerceptionConfig

    return PerceptionConfig.model_validate(
        {"conv": TINY_CONV, "hidden_dim": 16, "head_hidden": 16, "activation": "tanh", "epochs": 2, "batch_size": 8}
    )


@pytest.fixture
def tiny_run_config(tmp_path):
    """A whole pipeline small enough to run in seconds."""
    from pixel_eql.config import validate_config

    return validate_config(
        {
            "seed": 0,
            "out_dir": str(tmp_path / "run"),
            "env": {"env_id": "MiniPong", "frame_size": 16, "frame_stack": 2, "max_objects": 3, "max_steps": 60},
            "dataset": {"n_frames": 40},
            "perception": {"conv": TINY_CONV, "hidden_dim": 16, "head_hidden": 16, "epochs": 1, "batch_size": 8},
            "eql": {"repetitions": 1},
            "ppo": {
                "total_steps": 64,
                "n_envs": 2,
                "batch_size": 32,
                "num_minibatches": 2,
                "inner_iterations": 2,
                "actor_hidden": 8,
                "symbol_batch_size": 8,
                "fmae_interval": 1,
            },
            "explain": {"offline": True, "decision_samples": 2},
        }
    )
