"""Grid-world games that emit frames together with oracle symbols."""

from __future__ import annotations

from pixel_eql.envs.base import (
    ACTION_NAMES,
    GRID,
    GridEnv,
    Observation,
    PixelRect,
    Rect,
    StepResult,
    SymbolRecord,
    make_env,
    render_rects,
)
from pixel_eql.envs.crossing import MiniCrossing
from pixel_eql.envs.pong import MiniPong

__all__ = [
    "ACTION_NAMES",
    "GRID",
    "GridEnv",
    "MiniCrossing",
    "MiniPong",
    "Observation",
    "PixelRect",
    "Rect",
    "StepResult",
    "SymbolRecord",
    "make_env",
    "render_rects",
]
