# pixel_eql/__init__.py
"""
pixel-eql: symbolic policies learned from pixels.

A perception network maps stacked grayscale frames to object existence,
coordinates and sizes. An equation-learner actor reads those coordinates and is
trained with PPO under guidance from a neural actor, then pruned and exported
as polynomial expressions. The expressions, grounded in task concepts, feed
LLM prompts that explain the policy and single decisions.

The primary public API includes:

- load_config, RunConfig: the declarative run configuration.
- run_gen_dataset, run_pretrain, run_train, run_eval, run_extract,
  run_explain, run_grad_check: one pipeline stage each, as the CLI runs them.
- CommandSummary: the machine-readable result of a stage.
- PixelEqlError: root of every error raised on purpose.
"""

from __future__ import annotations

from .config import RunConfig, load_config
from .errors import PixelEqlError
from .models import CommandSummary
from .pipeline import (
    run_eval,
    run_explain,
    run_extract,
    run_gen_dataset,
    run_grad_check,
    run_pretrain,
    run_train,
)

__all__ = [
    # Configuration
    "RunConfig",
    "load_config",
    # Pipeline stages
    "run_gen_dataset",
    "run_pretrain",
    "run_train",
    "run_eval",
    "run_extract",
    "run_explain",
    "run_grad_check",
    # Results and errors
    "CommandSummary",
    "PixelEqlError",
]
