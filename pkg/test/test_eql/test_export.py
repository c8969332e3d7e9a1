from __future__ import annotations

from pathlib import Path

import pytest

from pixel_eql.eql import PolicyDocument, SymbolicExpr, load_policy, render_policy_text, save_policy
from pixel_eql.errors import FormatError, MissingArtifactError


def document() -> PolicyDocument:
    policy = {
        "logits_up1": SymbolicExpr({(("y_ball_1", 1),): 2.5, (): -0.3}),
        "logits_up2": SymbolicExpr(),
        "logits_down1": SymbolicExpr({(("y_agent_1", 2),): -1.123456789}),
        "logits_down2": SymbolicExpr({(): 0.004}),
    }
    return PolicyDocument.from_policy(
        policy,
        env_id="MiniPong",
        temperature=10.0,
        logits_per_action=2,
        actions=["up", "down"],
        variables=["x_ball_1", "y_ball_1", "x_agent_1", "y_agent_1"],
        relevant_objects=["ball", "agent"],
    )


def test_saved_policy_reloads_with_full_precision(tmp_path: Path):
    json_path, text_path = save_policy(document(), tmp_path)
    loaded = load_policy(json_path)
    assert loaded.expressions() == document().expressions()
    assert loaded.expressions()["logits_down1"].coefficient((("y_agent_1", 2),)) == -1.123456789
    assert text_path.read_text(encoding="utf-8") == render_policy_text(document())


def test_policy_text_lists_logits_then_probabilities():
    text = render_policy_text(document())
    assert "logits_up1 = 2.5*y_ball_1 - 0.3" in text
    assert "logits_up2 = 0" in text
    assert "logits_down1 = -1.1*y_agent_1**2" in text
    assert "action_up = [exp(logits_up1) + exp(logits_up2)] / sum(exp(logits))" in text
    assert text.index("logits_down2") < text.index("action_up")


def test_missing_policy_names_extract(tmp_path: Path):
    with pytest.raises(MissingArtifactError, match="pixel-eql extract"):
        load_policy(tmp_path / "policy.json")


def test_corrupt_policy_is_a_format_error(tmp_path: Path):
    path = tmp_path / "policy.json"
    path.write_text('{"schema": "eql-policy-v1"}', encoding="utf-8")
    with pytest.raises(FormatError):
        load_policy(path)


def test_unknown_schema_is_a_format_error(tmp_path: Path):
    json_path, _ = save_policy(document(), tmp_path)
    json_path.write_text(
        json_path.read_text(encoding="utf-8").replace("eql-policy-v1", "eql-policy-v9"), encoding="utf-8"
    )
    with pytest.raises(FormatError, match="eql-policy-v9"):
        load_policy(json_path)
