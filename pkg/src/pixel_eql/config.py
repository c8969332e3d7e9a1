# pixel_eql/config.py
"""
Run configuration.

One :class:`RunConfig` holds every knob of the pipeline. It is read from a TOML
(or JSON) file, validated by pydantic with unknown keys rejected, and written
back out as ``resolved_config.toml`` next to each run's artifacts.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import tomlkit
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pixel_eql.errors import ConfigError

# Use tomllib for Python 3.11+, fallback to tomli
try:
    import tomllib
except ImportError:
    import tomli as tomllib  # type: ignore[no-redef,import-not-found]

logger = logging.getLogger(__name__)

EnvId = Literal["MiniPong", "MiniCrossing"]
Variant = Literal["full", "no_pretrain", "fixed", "no_ng", "coor_neural"]

DEFAULT_FUNCTIONS = ("square", "cube", "constant", "identity", "multiply", "add")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class EnvConfig(_Strict):
    """Grid-world environment parameters."""

    env_id: EnvId = "MiniPong"
    frame_size: int = Field(default=32, ge=16)
    frame_stack: int = Field(default=4, ge=1)
    max_objects: int = Field(default=8, ge=1)
    seed: int = 0
    # Episodes are truncated after this many steps.
    max_steps: int = Field(default=1000, ge=1)
    # MiniPong ends when either side reaches this score.
    win_score: int = Field(default=5, ge=1)
    # MiniCrossing: per-step spawn probability for the busiest lane, and how
    # many times rarer the other lanes are.
    spawn_rate: float = Field(default=0.3, gt=0.0, le=1.0)
    spawn_skew: float = Field(default=10.0, ge=1.0)

    @model_validator(mode="after")
    def _check_slots(self) -> "EnvConfig":
        if self.env_id == "MiniPong" and self.max_objects < 3:
            raise ValueError("MiniPong needs max_objects >= 3 (ball and two paddles)")
        if self.env_id == "MiniCrossing" and self.max_objects < 2:
            raise ValueError("MiniCrossing needs max_objects >= 2 (agent and one lane)")
        return self


class DatasetConfig(_Strict):
    n_frames: int = Field(default=10_000, ge=10)
    behavior: Literal["random", "scripted"] = "random"
    # Label-weight parameters for the existence loss.
    alpha: float = Field(default=0.1, ge=0.0)
    beta: float = Field(default=10.0, ge=0.0)


class ConvSpec(_Strict):
    kernel: int = Field(ge=1)
    stride: int = Field(ge=1)
    padding: int = Field(ge=0)
    channels: int = Field(ge=1)


def _desk_conv() -> list[ConvSpec]:
    return [
        ConvSpec(kernel=5, stride=2, padding=2, channels=16),
        ConvSpec(kernel=5, stride=2, padding=2, channels=32),
        ConvSpec(kernel=5, stride=1, padding=2, channels=32),
    ]


class PerceptionConfig(_Strict):
    """Perception network shape and pre-training schedule."""

    conv: list[ConvSpec] = Field(default_factory=_desk_conv, min_length=1)
    hidden_dim: int = Field(default=256, ge=1)
    head_hidden: int = Field(default=256, ge=1)
    activation: Literal["relu", "tanh"] = "relu"
    epochs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=3e-4, gt=0.0)
    weight_decay: float = Field(default=1e-4, ge=0.0)
    existence_threshold: float = Field(default=0.5, gt=0.0, lt=1.0)
    focusing: float = Field(default=2.0, ge=0.0)
    prob_floor: float = Field(default=1e-6, gt=0.0, lt=0.5)

    @classmethod
    def full_scale(cls) -> "PerceptionConfig":
        """The 84-pixel configuration with wide convolutions and a 2048-unit embedding."""
        return cls(
            conv=[
                ConvSpec(kernel=5, stride=2, padding=2, channels=32),
                ConvSpec(kernel=5, stride=2, padding=2, channels=64),
                ConvSpec(kernel=5, stride=1, padding=2, channels=64),
            ],
            hidden_dim=2048,
            head_hidden=2048,
            epochs=600,
        )


class EQLConfig(_Strict):
    hidden_layers: int = Field(default=1, ge=1)
    repetitions: int = Field(default=4, ge=1)
    functions: tuple[str, ...] = DEFAULT_FUNCTIONS
    temperature: float = Field(default=10.0, gt=0.0)
    logits_per_action: int = Field(default=2, ge=1)
    reg_smoothing: float = Field(default=0.05, gt=0.0)
    prune_threshold: float = Field(default=0.01, ge=0.0)
    sig_digits: int = Field(default=2, ge=1, le=17)


class PPOConfig(_Strict):
    """Policy learning schedule, loss weights and ablation switches."""

    variant: Variant = "full"
    total_steps: int = Field(default=200_000, ge=1)
    n_envs: int = Field(default=8, ge=1)
    batch_size: int = Field(default=1024, ge=1)
    num_minibatches: int = Field(default=4, ge=1)
    inner_iterations: int = Field(default=4, ge=1)
    learning_rate: float = Field(default=2.5e-4, gt=0.0)
    adam_eps: float = Field(default=1e-5, gt=0.0)
    clip_eps: float = Field(default=0.1, gt=0.0, lt=1.0)
    gamma: float = Field(default=0.99, ge=0.0, le=1.0)
    gae_lambda: float = Field(default=0.95, ge=0.0, le=1.0)
    vf_coef: float = Field(default=0.5, ge=0.0)
    ent_coef: float = Field(default=0.01, ge=0.0)
    max_grad_norm: float = Field(default=0.5, gt=0.0)
    normalize_advantages: bool = True
    lambda_reg: float = Field(default=1e-3, ge=0.0)
    lambda_cnn: float = Field(default=2.0, ge=0.0)
    actor_hidden: int = Field(default=64, ge=1)
    symbol_batch_size: int = Field(default=32, ge=1)
    # Supervise the perception loss on oracle symbols from the rollout instead
    # of the pre-collected dataset.
    online_symbol_labels: bool = False
    fmae_normalization: Literal["per_sample", "per_entry"] = "per_sample"
    fmae_interval: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _check_batching(self) -> "PPOConfig":
        if self.batch_size % self.n_envs:
            raise ValueError("batch_size must be a multiple of n_envs")
        if self.batch_size % self.num_minibatches:
            raise ValueError("batch_size must be a multiple of num_minibatches")
        return self

    @property
    def num_updates(self) -> int:
        return max(1, self.total_steps // self.batch_size)


class ExplainConfig(_Strict):
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    temperature: float = Field(default=0.0, ge=0.0)
    timeout_seconds: float = Field(default=60.0, gt=0.0)
    max_retries: int = Field(default=3, ge=0)
    backoff_seconds: float = Field(default=1.0, ge=0.0)
    offline: bool = True
    decision_samples: int = Field(default=1, ge=1)


class RunConfig(_Strict):
    """Holds the whole pipeline configuration."""

    seed: int = 0
    out_dir: Path = Path("runs/default")
    dtype: Literal["float32", "float64"] = "float32"
    env: EnvConfig = Field(default_factory=EnvConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    perception: PerceptionConfig = Field(default_factory=PerceptionConfig)
    eql: EQLConfig = Field(default_factory=EQLConfig)
    ppo: PPOConfig = Field(default_factory=PPOConfig)
    explain: ExplainConfig = Field(default_factory=ExplainConfig)

    @property
    def torch_dtype(self):  # -> torch.dtype
        import torch

        return torch.float64 if self.dtype == "float64" else torch.float32


# ---------------- loading ----------------


def _read_mapping(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        if path.suffix == ".json":
            return json.loads(path.read_text(encoding="utf-8"))
        with path.open("rb") as f:
            return tomllib.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot parse {path}: {exc}") from exc


def validate_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a raw mapping, converting pydantic errors into ConfigError."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration:\n{exc}") from exc


# Global config cache to avoid re-reading the file multiple times
_config_cache: Dict[Path, RunConfig] = {}


def load_config(path: Optional[Path]) -> RunConfig:
    """
    Load a RunConfig from TOML or JSON. ``None`` yields the defaults.
    Results are cached per resolved path.
    """
    if path is None:
        return RunConfig()
    path = path.resolve()
    if path in _config_cache:
        return _config_cache[path]
    config = validate_config(_read_mapping(path))
    _config_cache[path] = config
    logger.debug("Loaded config from %s", path)
    return config


def clear_config_cache() -> None:
    """Clears the configuration cache. Useful for test isolation."""
    _config_cache.clear()


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Return a copy with dotted-key overrides applied, e.g. ``{"ppo.variant": "fixed"}``.
    ``None`` values are skipped so unset CLI flags leave the file's value alone.
    """
    data = config.model_dump(mode="json")
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = data
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    return validate_config(data)


# ---------------- writing ----------------


def _is_nested(value: Any) -> bool:
    if isinstance(value, dict):
        return True
    return isinstance(value, list) and bool(value) and all(isinstance(v, dict) for v in value)


def _fill(container: Any, mapping: Dict[str, Any]) -> None:
    # Plain keys must precede sub-tables in TOML.
    for key, value in sorted(mapping.items(), key=lambda kv: _is_nested(kv[1])):
        if value is None:
            continue
        if isinstance(value, dict):
            table = tomlkit.table()
            _fill(table, value)
            container.add(key, table)
        elif _is_nested(value):
            aot = tomlkit.aot()
            for item in value:
                table = tomlkit.table()
                _fill(table, item)
                aot.append(table)
            container.add(key, aot)
        else:
            container.add(key, value)


def render_resolved_config(config: RunConfig) -> str:
    """Serialize the effective configuration as a TOML document."""
    doc = tomlkit.document()
    doc.add(tomlkit.comment("Effective configuration for this run."))
    _fill(doc, config.model_dump(mode="json"))
    return tomlkit.dumps(doc)


def write_resolved_config(config: RunConfig, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "resolved_config.toml"
    path.write_text(render_resolved_config(config), encoding="utf-8")
    return path
