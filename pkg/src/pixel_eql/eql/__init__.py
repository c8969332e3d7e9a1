"""Equation-learner policy network, symbolic extraction and policy export."""

from __future__ import annotations

from pixel_eql.eql.export import PolicyDocument, load_policy, render_policy_text, save_policy
from pixel_eql.eql.expr import Add, Const, Mul, Pow, SymbolicExpr, Var, to_string
from pixel_eql.eql.extract import extract, relevant_variables
from pixel_eql.eql.network import (
    ActivationLayout,
    EQLNetwork,
    EQLOutput,
    activation,
    prune,
    reg_loss,
    reg_value,
)

__all__ = [
    "ActivationLayout",
    "Add",
    "Const",
    "EQLNetwork",
    "EQLOutput",
    "Mul",
    "PolicyDocument",
    "Pow",
    "SymbolicExpr",
    "Var",
    "activation",
    "extract",
    "load_policy",
    "prune",
    "reg_loss",
    "reg_value",
    "relevant_variables",
    "render_policy_text",
    "save_policy",
    "to_string",
]
