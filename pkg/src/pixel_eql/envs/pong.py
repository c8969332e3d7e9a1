# pixel_eql/envs/pong.py
"""
MiniPong: a one-ball paddle game against a speed-capped tracking opponent.

Slots: 0 ball, 1 agent paddle (right), 2 opponent paddle (left). Further
slots stay empty.
"""

from __future__ import annotations

import logging
from typing import Optional

from pixel_eql.envs.base import ACTION_DELTA, GRID, GridEnv, Rect

logger = logging.getLogger(__name__)

PADDLE_HEIGHT = 3
AGENT_COLUMN = GRID - 2
OPPONENT_COLUMN = 1

BALL_GRAY = 255
AGENT_GRAY = 204
OPPONENT_GRAY = 153


class MiniPong(GridEnv):
    env_id = "MiniPong"

    def _reset_state(self) -> None:
        self.agent_y = (GRID - PADDLE_HEIGHT) // 2
        self.opponent_y = (GRID - PADDLE_HEIGHT) // 2
        self.agent_score = 0
        self.opponent_score = 0
        self._serve()

    def _serve(self) -> None:
        self.ball_x = GRID // 2
        self.ball_y = int(self.rng.integers(2, GRID - 2))
        self.vx = 1 if self.rng.random() < 0.5 else -1
        self.vy = 1 if self.rng.random() < 0.5 else -1

    @property
    def object_names(self) -> tuple[str, ...]:
        names = ["ball", "agent", "opponent"]
        names += [f"object{j}" for j in range(3, self.config.max_objects)]
        return tuple(names)

    def _rects(self) -> list[Optional[Rect]]:
        return [
            Rect(self.ball_x, self.ball_y, 1, 1, BALL_GRAY),
            Rect(AGENT_COLUMN, self.agent_y, 1, PADDLE_HEIGHT, AGENT_GRAY),
            Rect(OPPONENT_COLUMN, self.opponent_y, 1, PADDLE_HEIGHT, OPPONENT_GRAY),
        ]

    @staticmethod
    def _hits(paddle_y: int, ball_y: int) -> bool:
        return paddle_y <= ball_y < paddle_y + PADDLE_HEIGHT

    def _move_opponent(self) -> None:
        # Half speed: the opponent moves only on even steps.
        if self.t % 2:
            return
        target = self.ball_y - PADDLE_HEIGHT // 2
        if target < self.opponent_y:
            self.opponent_y -= 1
        elif target > self.opponent_y:
            self.opponent_y += 1
        self.opponent_y = min(max(self.opponent_y, 0), GRID - PADDLE_HEIGHT)

    def _advance(self, action: int) -> tuple[float, bool]:
        self.agent_y = min(max(self.agent_y + ACTION_DELTA[action], 0), GRID - PADDLE_HEIGHT)
        self._move_opponent()

        next_x = self.ball_x + self.vx
        paddle_y = None
        if self.vx > 0 and next_x == AGENT_COLUMN:
            paddle_y = self.agent_y
        elif self.vx < 0 and next_x == OPPONENT_COLUMN:
            paddle_y = self.opponent_y
        if paddle_y is not None and self._hits(paddle_y, self.ball_y):
            self.vx = -self.vx
            offset = self.ball_y - (paddle_y + PADDLE_HEIGHT // 2)
            if offset:
                self.vy = offset
            next_x = self.ball_x

        next_y = self.ball_y + self.vy
        if next_y < 0:
            next_y, self.vy = -next_y, -self.vy
        elif next_y > GRID - 1:
            next_y, self.vy = 2 * (GRID - 1) - next_y, -self.vy
        self.ball_x, self.ball_y = next_x, next_y

        reward = 0.0
        if self.ball_x > GRID - 1:
            reward = -1.0
            self.opponent_score += 1
            self._serve()
        elif self.ball_x < 0:
            reward = 1.0
            self.agent_score += 1
            self._serve()
        terminated = max(self.agent_score, self.opponent_score) >= self.config.win_score
        return reward, terminated

    def scripted_action(self) -> int:
        centre = self.agent_y + PADDLE_HEIGHT // 2
        if self.ball_y < centre:
            return 1
        if self.ball_y > centre:
            return 2
        return 0
