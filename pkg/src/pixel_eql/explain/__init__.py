"""Grounded explanation prompts for extracted policies and single decisions."""

from __future__ import annotations

from pixel_eql.explain.gradients import decision_context, grad_loglik
from pixel_eql.explain.grounding import (
    ActionEffect,
    DecisionContext,
    PolicyDescription,
    TaskDescription,
    VariableReading,
    task_description,
)
from pixel_eql.explain.llm_client import llm_chat, run_dialogue
from pixel_eql.explain.prompts import render_decision_prompt, render_policy_prompt, render_public_prompt
from pixel_eql.explain.settings import LLMSettings

__all__ = [
    "ActionEffect",
    "DecisionContext",
    "LLMSettings",
    "PolicyDescription",
    "TaskDescription",
    "VariableReading",
    "decision_context",
    "grad_loglik",
    "llm_chat",
    "render_decision_prompt",
    "render_policy_prompt",
    "render_public_prompt",
    "run_dialogue",
    "task_description",
]
