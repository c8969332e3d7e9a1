# pixel_eql/dataset/generate.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from pixel_eql.config import EnvConfig
from pixel_eql.core.rng import numpy_rng
from pixel_eql.envs.base import Observation, make_env
from pixel_eql.errors import ContractError

logger = logging.getLogger(__name__)

TRAIN_FRACTION = 0.8
MIN_FRAMES = 10
SCRIPTED_EPSILON = 0.1

Behavior = Literal["random", "scripted"]


@dataclass
class FrameSymbolDataset:
    """
    Stacked frames with oracle symbols and a fixed train/test split.

    Arrays are indexed ``[sample, frame]``; frames are stored as uint8 gray levels.
    """

    env: EnvConfig
    object_names: tuple[str, ...]
    frames: np.ndarray  # [N, K, S, S] uint8
    exist: np.ndarray  # [N, K, C] uint8
    coords: np.ndarray  # [N, K, C, 2] float64
    sizes: np.ndarray  # [N, K, C, 2] float64
    train_idx: np.ndarray  # int64
    test_idx: np.ndarray  # int64

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def frame_stack(self) -> int:
        return int(self.frames.shape[1])

    @property
    def frame_size(self) -> int:
        return int(self.frames.shape[2])

    @property
    def max_objects(self) -> int:
        return int(self.exist.shape[2])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameSymbolDataset):
            return NotImplemented
        return (
            self.env == other.env
            and self.object_names == other.object_names
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("frames", "exist", "coords", "sizes", "train_idx", "test_idx")
            )
        )


def split_indices(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded disjoint split with ``round(0.8 n)`` training samples."""
    perm = numpy_rng(seed, "split").permutation(n)
    n_train = int(np.floor(TRAIN_FRACTION * n + 0.5))
    return np.sort(perm[:n_train]).astype(np.int64), np.sort(perm[n_train:]).astype(np.int64)


def generate(
    env_config: EnvConfig,
    n_frames: int,
    behavior: Behavior = "random",
    seed: int = 0,
) -> FrameSymbolDataset:
    """
    Roll out a behavior policy and record every observation it sees.

    Raises:
        ContractError: for fewer than 10 frames or an unknown behavior.
    """
    if n_frames < MIN_FRAMES:
        raise ContractError(f"n_frames must be >= {MIN_FRAMES}, got {n_frames}")
    if behavior not in ("random", "scripted"):
        raise ContractError(f"Unknown behavior policy: {behavior}")

    env = make_env(env_config.model_copy(update={"seed": seed}))
    rng = numpy_rng(seed, "behavior")
    observations: list[Observation] = []
    obs = env.reset(seed=seed)
    episodes = 1
    while True:
        observations.append(obs)
        if len(observations) == n_frames:
            break
        if behavior == "scripted" and rng.random() >= SCRIPTED_EPSILON:
            action = env.scripted_action()
        else:
            action = int(rng.integers(env.n_actions))
        result = env.step(action)
        obs = result.observation
        if result.done:
            obs = env.reset()
            episodes += 1

    logger.info(
        "Generated %s samples over %s episodes of %s", n_frames, episodes, env_config.env_id
    )
    exist, coords, sizes = zip(*(o.symbol_arrays() for o in observations))
    train_idx, test_idx = split_indices(n_frames, seed)
    return FrameSymbolDataset(
        env=env_config,
        object_names=env.object_names,
        frames=np.stack([o.frames for o in observations]),
        exist=np.stack(exist).astype(np.uint8),
        coords=np.stack(coords),
        sizes=np.stack(sizes),
        train_idx=train_idx,
        test_idx=test_idx,
    )
