# pixel_eql/envs/crossing.py
"""
MiniCrossing: walk a single column from the bottom row to the top row through
horizontal traffic.

Slot 0 is the agent; slot ``k + 1`` holds the car of lane ``k``. Lane 0 spawns
cars ``spawn_skew`` times as often as the others, so the dataset is imbalanced
the way real scenes are.
"""

from __future__ import annotations

import logging
from typing import Optional

from pixel_eql.envs.base import ACTION_DELTA, GRID, GridEnv, Rect

logger = logging.getLogger(__name__)

CAR_WIDTH = 2
AGENT_COLUMN = GRID // 2
START_ROW = GRID - 1

AGENT_GRAY = 255
CAR_GRAY = 128


def lane_rows(n_lanes: int) -> list[int]:
    """Rows of the lanes, spread between row 2 and row ``GRID - 3``."""
    if n_lanes == 1:
        return [GRID // 2 - 1]
    return [2 + (k * (GRID - 5)) // (n_lanes - 1) for k in range(n_lanes)]


class MiniCrossing(GridEnv):
    env_id = "MiniCrossing"

    @property
    def n_lanes(self) -> int:
        return self.config.max_objects - 1

    @property
    def object_names(self) -> tuple[str, ...]:
        return ("agent",) + tuple(f"car{k + 1}" for k in range(self.n_lanes))

    def _reset_state(self) -> None:
        self.rows = lane_rows(self.n_lanes)
        self.agent_y = START_ROW
        # One car per lane at most; None marks an empty lane.
        self.cars: list[Optional[int]] = [None] * self.n_lanes

    def _direction(self, lane: int) -> int:
        return 1 if lane % 2 == 0 else -1

    def _spawn_probability(self, lane: int) -> float:
        if lane == 0:
            return self.config.spawn_rate
        return self.config.spawn_rate / self.config.spawn_skew

    def _rects(self) -> list[Optional[Rect]]:
        rects: list[Optional[Rect]] = [Rect(AGENT_COLUMN, self.agent_y, 1, 1, AGENT_GRAY)]
        for lane, x in enumerate(self.cars):
            rects.append(
                None if x is None else Rect(x, self.rows[lane], CAR_WIDTH, 1, CAR_GRAY)
            )
        return rects

    def _collides(self) -> bool:
        for lane, x in enumerate(self.cars):
            if x is None or self.rows[lane] != self.agent_y:
                continue
            if x <= AGENT_COLUMN < x + CAR_WIDTH:
                return True
        return False

    def _advance(self, action: int) -> tuple[float, bool]:
        self.agent_y = min(max(self.agent_y + ACTION_DELTA[action], 0), START_ROW)

        for lane, x in enumerate(self.cars):
            if x is None:
                continue
            x += self._direction(lane)
            self.cars[lane] = x if 0 <= x <= GRID - CAR_WIDTH else None
        # Draws happen for every lane every step so the stream stays aligned.
        draws = self.rng.random(self.n_lanes)
        for lane in range(self.n_lanes):
            if self.cars[lane] is None and draws[lane] < self._spawn_probability(lane):
                self.cars[lane] = 0 if self._direction(lane) > 0 else GRID - CAR_WIDTH

        reward = 0.0
        if self._collides():
            self.agent_y = START_ROW
        elif self.agent_y == 0:
            reward = 1.0
            self.agent_y = START_ROW
        return reward, False

    def scripted_action(self) -> int:
        target = self.agent_y - 1
        for lane, x in enumerate(self.cars):
            if x is None or self.rows[lane] != target:
                continue
            ahead = x + self._direction(lane)
            if ahead <= AGENT_COLUMN < ahead + CAR_WIDTH or x <= AGENT_COLUMN < x + CAR_WIDTH:
                return 0
        return 1
