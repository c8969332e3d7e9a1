from __future__ import annotations

from pathlib import Path

import pytest

from pixel_eql.eql import PolicyDocument, SymbolicExpr
from pixel_eql.errors import ContractError
from pixel_eql.explain import (
    DecisionContext,
    VariableReading,
    render_decision_prompt,
    render_policy_prompt,
    render_public_prompt,
    task_description,
)
from pixel_eql.explain.grounding import PolicyDescription
from pixel_eql.variables import variable_names

GOLDEN = Path(__file__).parent.parent / "golden"
OBJECTS = ("ball", "agent", "opponent")


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def minipong_policy() -> PolicyDescription:
    def lin(**coeffs: float) -> SymbolicExpr:
        return SymbolicExpr({((k, 1),) if k != "const" else (): v for k, v in coeffs.items()})

    policy = {
        "logits_noop1": lin(y_ball_1=0.5, const=-0.2),
        "logits_noop2": SymbolicExpr(),
        "logits_up1": lin(y_agent_1=-3.1, y_ball_1=2.9),
        "logits_up2": lin(const=0.12),
        "logits_down1": lin(y_agent_1=3.1, y_ball_1=-2.9),
        "logits_down2": SymbolicExpr(),
    }
    document = PolicyDocument.from_policy(
        policy,
        env_id="MiniPong",
        temperature=10.0,
        logits_per_action=2,
        actions=["noop", "up", "down"],
        variables=variable_names(OBJECTS, 1),
    )
    return PolicyDescription.from_document(document)


@pytest.fixture
def task():
    return task_description("MiniPong", 1, OBJECTS)


def test_public_prompt_matches_golden(task):
    assert render_public_prompt(task, minipong_policy()) + "\n" == golden("minipong_public.txt")


def test_policy_turns_match_golden(task):
    turns = render_policy_prompt(task, minipong_policy())
    assert len(turns) == 4
    assert turns[0] + "\n" == golden("minipong_policy_turn_1.txt")
    assert turns[1:3] == ["Analyze action up.", "Analyze action down."]
    assert turns[3] + "\n" == golden("minipong_policy_turn_4.txt")


def test_decision_prompt_matches_golden(task):
    readings = [
        ("x_ball_1", 0.5, 0.0),
        ("y_ball_1", 0.75, 2.9),
        ("x_agent_1", 0.9375, 0.0),
        ("y_agent_1", 0.25, -3.1),
        ("x_opponent_1", 0.0625, 0.0),
        ("y_opponent_1", 0.5, 0.0),
    ]
    context = DecisionContext(
        action="up", readings=[VariableReading(name=n, value=v, gradient=g) for n, v, g in readings]
    )
    assert render_decision_prompt(task, minipong_policy(), context) == golden("minipong_decision.txt")


def test_public_prompt_has_the_expected_sections(task):
    text = render_public_prompt(task, minipong_policy())
    positions = [
        text.index(header)
        for header in ("# task Description", "## Input Variable", "## Logits", "## The Probability of Actions")
    ]
    assert positions == sorted(positions)


def test_action_order_can_be_chosen(task):
    turns = render_policy_prompt(task, minipong_policy(), actions=["down", "noop"])
    assert turns[0].endswith("Now, analyze action down.")
    assert turns[1] == "Analyze action noop."


def test_unknown_action_is_rejected(task):
    with pytest.raises(ContractError):
        render_policy_prompt(task, minipong_policy(), actions=["fire"])
    with pytest.raises(ContractError):
        render_decision_prompt(task, minipong_policy(), DecisionContext(action="fire"))


def test_stacked_frames_are_described_oldest_first():
    text = task_description("MiniPong", 4, OBJECTS).coordinates
    assert "latest 4 consecutive frames" in text
    assert "Frame 4 is the current frame." in text
    assert "Frame 3 was observed 1 step earlier." in text
    assert "Frame 1 was observed 3 steps earlier." in text


def test_crossing_names_its_cars():
    task = task_description("MiniCrossing", 1, ("agent", "car1", "car2"))
    assert "the cars car1 and car2" in task.naming
    assert task.action_names == ["noop", "up", "down"]


def test_unknown_task_is_rejected():
    with pytest.raises(ContractError):
        task_description("Breakout", 1, ("ball",))
