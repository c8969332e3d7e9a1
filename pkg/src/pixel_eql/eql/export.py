# pixel_eql/eql/export.py
"""
Persisted policy formulas.

``policy.json`` keeps full-precision coefficients for reloading;
``policy.txt`` is the human-readable listing with the probability formulas.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, Field, ValidationError

from pixel_eql.eql.expr import SymbolicExpr, to_string
from pixel_eql.errors import FormatError, MissingArtifactError

logger = logging.getLogger(__name__)

POLICY_SCHEMA = "eql-policy-v1"


class Term(BaseModel):
    coeff: float
    factors: list[tuple[str, int]] = Field(default_factory=list)


class PolicyDocument(BaseModel):
    """Serializable form of an extracted policy."""

    policy_schema: str = Field(default=POLICY_SCHEMA, alias="schema")
    env_id: str
    temperature: float
    logits_per_action: int
    actions: list[str]
    variables: list[str]
    relevant_objects: list[str] = Field(default_factory=list)
    logits: dict[str, list[Term]]

    model_config = {"populate_by_name": True}

    @classmethod
    def from_policy(
        cls,
        policy: dict[str, SymbolicExpr],
        *,
        env_id: str,
        temperature: float,
        logits_per_action: int,
        actions: Sequence[str],
        variables: Sequence[str],
        relevant_objects: Sequence[str] = (),
    ) -> "PolicyDocument":
        return cls(
            env_id=env_id,
            temperature=temperature,
            logits_per_action=logits_per_action,
            actions=list(actions),
            variables=list(variables),
            relevant_objects=list(relevant_objects),
            logits={
                name: [Term(coeff=c, factors=list(m)) for m, c in expr.sorted_terms()]
                for name, expr in policy.items()
            },
        )

    def expressions(self) -> dict[str, SymbolicExpr]:
        return {
            name: SymbolicExpr({tuple((v, int(p)) for v, p in t.factors): t.coeff for t in terms})
            for name, terms in self.logits.items()
        }

    def logit_names(self, action: str) -> list[str]:
        return [f"logits_{action}{g + 1}" for g in range(self.logits_per_action)]


def probability_formula(action: str, logit_names: Sequence[str]) -> str:
    numerator = " + ".join(f"exp({name})" for name in logit_names)
    return f"action_{action} = [{numerator}] / sum(exp(logits))"


def render_policy_text(document: PolicyDocument, sig_digits: int = 2) -> str:
    """One ``name = formula`` line per logit, then the action probability formulas."""
    exprs = document.expressions()
    blocks = [f"{name} = {to_string(exprs[name], sig_digits)}" for name in document.logits]
    formulas = [probability_formula(a, document.logit_names(a)) for a in document.actions]
    return "\n\n".join(blocks) + "\n\n" + "\n".join(formulas) + "\n"


def save_policy(document: PolicyDocument, out_dir: Path, sig_digits: int = 2) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "policy.json"
    text_path = out_dir / "policy.txt"
    json_path.write_text(document.model_dump_json(indent=2, by_alias=True) + "\n", encoding="utf-8")
    text_path.write_text(render_policy_text(document, sig_digits), encoding="utf-8")
    logger.info("Wrote %s and %s", json_path, text_path)
    return json_path, text_path


def load_policy(path: Path) -> PolicyDocument:
    if not path.is_file():
        raise MissingArtifactError(path, "extract")
    try:
        document = PolicyDocument.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid policy document: {exc}") from exc
    if document.policy_schema != POLICY_SCHEMA:
        raise FormatError(f"{path}: unsupported schema {document.policy_schema!r}")
    return document
