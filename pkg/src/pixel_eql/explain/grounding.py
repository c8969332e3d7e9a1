# pixel_eql/explain/grounding.py
"""
Plain-language descriptions of a task, a policy and a single decision.

These models are what the prompt templates render; every number that ends up
in a prompt is stored here first.
"""

from __future__ import annotations

import logging
from typing import Sequence

from pydantic import BaseModel, Field

from pixel_eql.eql.export import PolicyDocument, probability_formula
from pixel_eql.eql.expr import to_string
from pixel_eql.errors import ContractError

logger = logging.getLogger(__name__)


class ActionEffect(BaseModel):
    name: str
    effect: str


class TaskDescription(BaseModel):
    title: str
    goal: str
    actions: list[ActionEffect]
    coordinates: str
    naming: str
    example_question: str

    @property
    def action_names(self) -> list[str]:
        return [a.name for a in self.actions]


class LogitLine(BaseModel):
    name: str
    text: str


class PolicyDescription(BaseModel):
    logits: list[LogitLine]
    probabilities: list[str]
    actions: list[str]
    variables: list[str]
    sig_digits: int = 2

    @classmethod
    def from_document(cls, document: PolicyDocument, sig_digits: int = 2) -> "PolicyDescription":
        exprs = document.expressions()
        return cls(
            logits=[LogitLine(name=n, text=to_string(exprs[n], sig_digits)) for n in document.logits],
            probabilities=[probability_formula(a, document.logit_names(a)) for a in document.actions],
            actions=list(document.actions),
            variables=list(document.variables),
            sig_digits=sig_digits,
        )


class VariableReading(BaseModel):
    name: str
    value: float
    gradient: float

    @property
    def value_text(self) -> str:
        return repr(float(self.value))

    @property
    def gradient_text(self) -> str:
        return f"{self.gradient:.2e}"


class DecisionContext(BaseModel):
    action: str
    readings: list[VariableReading] = Field(default_factory=list)


# ---------------- task texts ----------------


def _join(items: Sequence[str]) -> str:
    if len(items) <= 2:
        return " and ".join(items)
    return ", ".join(items[:-1]) + ", and " + items[-1]


def _coordinates_text(frame_stack: int) -> str:
    lines = [
        "We set up an xOy coordinate system on the task screen. The origin is at the upper left "
        "corner, the y-axis points downwards and the x-axis points to the right."
    ]
    if frame_stack == 1:
        lines.append("The agent receives the latest frame and uses the coordinates of the objects in it as input.")
        lines.append("Frame 1 is the current frame.")
    else:
        lines.append(
            f"The agent receives the latest {frame_stack} consecutive frames and uses the coordinates "
            "of the objects in these frames as input."
        )
        lines.append(f"Frame {frame_stack} is the current frame.")
        for k in range(frame_stack - 1, 0, -1):
            back = frame_stack - k
            lines.append(f"Frame {k} was observed {back} step{'s' if back > 1 else ''} earlier.")
        lines.append("Comparing the coordinates of the same object across frames reveals how it moves.")
    return " ".join(lines)


def _naming_text(objects: Sequence[str]) -> str:
    return (
        f"The objects of interest are {_join(list(objects))}. The input variables follow the naming "
        "convention [x/y]_object_frame. For example, x_agent_1 is the x coordinate of the agent at "
        "frame 1. Remember that the input variables are coordinates of objects and lie in the range [0,1]."
    )


def task_description(env_id: str, frame_stack: int, object_names: Sequence[str], win_score: int = 5) -> TaskDescription:
    """
    Describe a built-in task for an explanation prompt.

    Raises:
        ContractError: for an unknown task.
    """
    if env_id == "MiniPong":
        return TaskDescription(
            title="MiniPong",
            goal=(
                "There are two paddles on the task screen, one at the left edge and one at the right "
                "edge. The agent controls the right paddle and its opponent controls the left one. "
                "Both paddles can only move up or down.\n\n"
                "As in table tennis, the agent tries to hit the ball back to the opponent's side (left). "
                "The agent earns a point when the opponent misses the ball and loses one when it misses "
                f"the ball itself. The game ends when either side reaches {win_score} points."
            ),
            actions=[
                ActionEffect(name="noop", effect="take no operation."),
                ActionEffect(name="up", effect="move its paddle upward."),
                ActionEffect(name="down", effect="move its paddle downward."),
            ],
            coordinates=_coordinates_text(frame_stack),
            naming=_naming_text(["the agent", "the opponent", "the ball"]),
            example_question="would the agent earn a point by choosing such an action?",
        )
    if env_id == "MiniCrossing":
        cars = [name for name in object_names if name != "agent"]
        noun = "car" if len(cars) == 1 else "cars"
        return TaskDescription(
            title="MiniCrossing",
            goal=(
                "The agent starts at the bottom of the task screen and has to reach the top row. Cars "
                "drive left or right along horizontal lanes in between, at most one car per lane.\n\n"
                "The agent earns a point each time it reaches the top row and then starts again from "
                "the bottom. A car that hits the agent sends it back to the bottom without a point."
            ),
            actions=[
                ActionEffect(name="noop", effect="stay in place."),
                ActionEffect(name="up", effect="move one step upward."),
                ActionEffect(name="down", effect="move one step downward."),
            ],
            coordinates=_coordinates_text(frame_stack),
            naming=_naming_text(["the agent", f"the {noun} {_join(cars)}"]),
            example_question="would the agent avoid a collision by choosing such an action?",
        )
    raise ContractError(f"No task description for {env_id!r}")
