# pixel_eql/core/rng.py
"""
Seeded random streams.

Every stochastic component draws from its own counter-based Philox stream,
derived from the run seed and a stream key, so adding a consumer never shifts
the numbers another consumer sees.
"""

from __future__ import annotations

import logging
import zlib
from typing import Union

import numpy as np
import torch

logger = logging.getLogger(__name__)

StreamKey = Union[int, str]


def _key_to_int(key: StreamKey) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key)


def seed_sequence(seed: int, *keys: StreamKey) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(_key_to_int(k) for k in keys)
    )


def numpy_rng(seed: int, *keys: StreamKey) -> np.random.Generator:
    """A Philox generator for the stream ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def torch_generator(seed: int, *keys: StreamKey) -> torch.Generator:
    """A CPU ``torch.Generator`` seeded from the stream ``(seed, *keys)``."""
    state = seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)[0]
    generator = torch.Generator(device="cpu")
    generator.manual_seed(int(state) & 0x7FFF_FFFF_FFFF_FFFF)
    return generator


def seed_everything(seed: int) -> None:
    """Seed torch's global generator and pin CPU execution to deterministic kernels."""
    torch.manual_seed(int(seed))
    torch.use_deterministic_algorithms(True, warn_only=True)
    logger.debug("Seeded torch with %s", seed)
