# pixel_eql/agent/persistence.py
"""Saving and restoring a trained agent (perception plus actors)."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import torch
from pydantic import ValidationError

from pixel_eql.agent.actors import Actors
from pixel_eql.checkpoints import AGENT_SCHEMA, build_perception, load_state, perception_metadata, save_state
from pixel_eql.config import EQLConfig
from pixel_eql.errors import FormatError
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)


def save_agent(
    path: Path,
    perception: PerceptionNet,
    actors: Actors,
    *,
    object_names: tuple[str, ...],
    env: dict[str, Any],
    extra: dict[str, Any] | None = None,
) -> Path:
    state = {f"perception.{k}": v for k, v in perception.state_dict().items()}
    state.update({f"actors.{k}": v for k, v in actors.state_dict().items()})
    metadata = {
        "perception": perception_metadata(perception, object_names, env["env_id"]),
        "env": env,
        "variant": actors.variant,
        "n_actions": actors.n_actions,
        "actor_hidden": actors.critic.net[0].out_features,
        "eql": actors.eql.config.model_dump(mode="json") if actors.eql is not None else None,
        "extra": extra or {},
    }
    return save_state(path, AGENT_SCHEMA, state, metadata)


def load_agent(path: Path) -> tuple[PerceptionNet, Actors, dict[str, Any]]:
    """
    Raises:
        MissingArtifactError: if no agent was trained yet.
        FormatError: if the file is not an agent checkpoint.
    """
    state, metadata = load_state(path, AGENT_SCHEMA, "train")
    perception = build_perception(metadata["perception"])
    try:
        eql_config = EQLConfig.model_validate(metadata["eql"] or {})
        actors = Actors(
            variant=metadata["variant"],
            hidden_dim=perception.hidden_dim,
            n_variables=perception.n_variables,
            n_actions=int(metadata["n_actions"]),
            eql_config=eql_config,
            actor_hidden=int(metadata["actor_hidden"]),
        )
    except (KeyError, ValidationError) as exc:
        raise FormatError(f"{path}: agent metadata incomplete: {exc}") from exc

    dtype = next(iter(state.values())).dtype if state else torch.float32
    perception.to(dtype)
    actors.to(dtype)
    perception.load_state_dict({k[len("perception."):]: v for k, v in state.items() if k.startswith("perception.")})
    actors.load_state_dict({k[len("actors."):]: v for k, v in state.items() if k.startswith("actors.")})
    return perception, actors, metadata
