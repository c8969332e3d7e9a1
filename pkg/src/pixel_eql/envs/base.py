# pixel_eql/envs/base.py
"""
Shared machinery for the grid-world games.

Both games live on a 16x16 cell grid rendered into square grayscale frames.
Every object is an axis-aligned rectangle; its symbolic record is the centre
and size of that rectangle in frame-normalized coordinates, origin upper-left,
y pointing down.
"""

from __future__ import annotations

import abc
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from pixel_eql.config import EnvConfig
from pixel_eql.core.rng import numpy_rng
from pixel_eql.errors import ConfigError, ContractError

logger = logging.getLogger(__name__)

GRID = 16
ACTION_NAMES = ("noop", "up", "down")
ACTION_DELTA = (0, -1, 1)


@dataclass(frozen=True)
class Rect:
    """A rectangle in grid cells, drawn with a fixed gray level."""

    x: int
    y: int
    w: int
    h: int
    gray: int


@dataclass(frozen=True)
class PixelRect:
    left: int
    top: int
    width: int
    height: int
    gray: int


@dataclass(frozen=True)
class SymbolRecord:
    """
    Oracle symbols of one frame.

    ``exist[j]`` is 1 when slot ``j`` holds a visible object. Absent slots carry
    zero coordinates and sizes.
    """

    exist: np.ndarray  # [C] uint8
    coords: np.ndarray  # [C, 2] float64, (x, y) centres
    sizes: np.ndarray  # [C, 2] float64, (w, h)

    @property
    def max_objects(self) -> int:
        return int(self.exist.shape[0])


@dataclass(frozen=True)
class Observation:
    """The last ``K`` frames (oldest first) with their symbol records."""

    frames: np.ndarray  # [K, S, S] uint8
    symbols: tuple[SymbolRecord, ...]

    def symbol_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Stacked ``(exist [K, C], coords [K, C, 2], sizes [K, C, 2])``."""
        return (
            np.stack([s.exist for s in self.symbols]),
            np.stack([s.coords for s in self.symbols]),
            np.stack([s.sizes for s in self.symbols]),
        )


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: Mapping[str, Any] = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


# ---------------- rendering ----------------


def to_pixels(rect: Rect, cell: int) -> PixelRect:
    return PixelRect(rect.x * cell, rect.y * cell, rect.w * cell, rect.h * cell, rect.gray)


def render_rects(
    frame_size: int, rects: Sequence[Optional[PixelRect]]
) -> tuple[np.ndarray, SymbolRecord]:
    """
    Draw ``rects`` in slot order onto a black frame; later slots occlude earlier ones.

    Symbols are computed from the rectangles themselves, so an occluded object
    is still listed as present.
    """
    frame = np.zeros((frame_size, frame_size), dtype=np.uint8)
    n = len(rects)
    exist = np.zeros(n, dtype=np.uint8)
    coords = np.zeros((n, 2), dtype=np.float64)
    sizes = np.zeros((n, 2), dtype=np.float64)
    for j, rect in enumerate(rects):
        if rect is None:
            continue
        left, top = max(rect.left, 0), max(rect.top, 0)
        right = min(rect.left + rect.width, frame_size)
        bottom = min(rect.top + rect.height, frame_size)
        if right <= left or bottom <= top:
            continue
        frame[top:bottom, left:right] = rect.gray
        exist[j] = 1
        coords[j] = (
            (left + (right - left) / 2.0) / frame_size,
            (top + (bottom - top) / 2.0) / frame_size,
        )
        sizes[j] = ((right - left) / frame_size, (bottom - top) / frame_size)
    return frame, SymbolRecord(exist=exist, coords=coords, sizes=sizes)


# ---------------- environment base ----------------


class GridEnv(abc.ABC):
    """
    A seeded, stepwise game rendered at ``config.frame_size`` pixels.

    Subclasses implement the game rules in :meth:`_reset_state` and
    :meth:`_advance`, and describe their objects in :meth:`_rects`.
    """

    env_id: str = ""

    def __init__(self, config: EnvConfig) -> None:
        self.config = config
        self.cell = config.frame_size // GRID
        self.rng = numpy_rng(config.seed, self.env_id)
        self.t = 0
        self._frames: deque[np.ndarray] = deque(maxlen=config.frame_stack)
        self._symbols: deque[SymbolRecord] = deque(maxlen=config.frame_stack)

    # ---- subclass hooks ----
    @property
    @abc.abstractmethod
    def object_names(self) -> tuple[str, ...]:
        """Slot names, length ``max_objects``."""

    @abc.abstractmethod
    def _reset_state(self) -> None: ...

    @abc.abstractmethod
    def _advance(self, action: int) -> tuple[float, bool]:
        """Apply one step; return ``(reward, terminated)``."""

    @abc.abstractmethod
    def _rects(self) -> list[Optional[Rect]]: ...

    @abc.abstractmethod
    def scripted_action(self) -> int:
        """A competent hand-written action for the current state."""

    # ---- public API ----
    @property
    def action_names(self) -> tuple[str, ...]:
        return ACTION_NAMES

    @property
    def n_actions(self) -> int:
        return len(ACTION_NAMES)

    def render(self) -> tuple[np.ndarray, SymbolRecord]:
        slots = self._rects()
        slots = slots + [None] * (self.config.max_objects - len(slots))
        pixels = [None if r is None else to_pixels(r, self.cell) for r in slots]
        return render_rects(self.config.frame_size, pixels)

    def reset(self, seed: Optional[int] = None) -> Observation:
        """Start a new episode. A seed restarts the random stream; ``None`` continues it."""
        if seed is not None:
            self.rng = numpy_rng(seed, self.env_id)
        self.t = 0
        self._reset_state()
        frame, symbols = self.render()
        self._frames.clear()
        self._symbols.clear()
        for _ in range(self.config.frame_stack):
            self._frames.append(frame)
            self._symbols.append(symbols)
        return self.observation()

    def step(self, action: int) -> StepResult:
        if not 0 <= int(action) < self.n_actions:
            raise ContractError(f"Action {action} out of range for {self.env_id}")
        reward, terminated = self._advance(int(action))
        self.t += 1
        truncated = not terminated and self.t >= self.config.max_steps
        frame, symbols = self.render()
        self._frames.append(frame)
        self._symbols.append(symbols)
        return StepResult(
            observation=self.observation(),
            reward=reward,
            terminated=terminated,
            truncated=truncated,
        )

    def observation(self) -> Observation:
        return Observation(frames=np.stack(self._frames), symbols=tuple(self._symbols))


def make_env(config: EnvConfig | Mapping[str, Any]) -> GridEnv:
    """Build the environment named by ``config.env_id``."""
    # pylint: disable=import-outside-toplevel
    from pixel_eql.envs.crossing import MiniCrossing
    from pixel_eql.envs.pong import MiniPong

    if not isinstance(config, EnvConfig):
        try:
            config = EnvConfig.model_validate(dict(config))
        except ValidationError as exc:
            raise ConfigError(f"Invalid environment config:\n{exc}") from exc
    registry: dict[str, type[GridEnv]] = {"MiniPong": MiniPong, "MiniCrossing": MiniCrossing}
    return registry[config.env_id](config)
