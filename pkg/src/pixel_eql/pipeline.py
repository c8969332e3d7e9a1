# pixel_eql/pipeline.py
"""
One function per subcommand.

Every ``run_*`` reads its inputs from ``config.out_dir``, writes its artifacts
there, and returns a :class:`CommandSummary`. The layout of an output
directory is::

    dataset/                      gen-dataset
    perception.pcp                pretrain
    pretrain_curve.csv            pretrain
    agent.agt, train_log.csv      train
    eval_returns-<mode>.csv       eval
    policy.json, policy.txt       extract
    prompts/, outbox/, responses/ explain
    summary-<command>.json        every subcommand
    report-<command>.md           every subcommand
    resolved_config.toml          every subcommand
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import httpx
import torch
from pydantic import ValidationError

from pixel_eql.agent.actors import Actors, policy_forward
from pixel_eql.agent.evaluation import Mode, evaluate
from pixel_eql.agent.persistence import load_agent, save_agent
from pixel_eql.agent.trainer import train
from pixel_eql.checkpoints import load_perception, save_perception
from pixel_eql.config import EnvConfig, RunConfig, write_resolved_config
from pixel_eql.core.rng import seed_everything
from pixel_eql.core.tensor import unit_frames
from pixel_eql.dataset import storage
from pixel_eql.dataset.generate import FrameSymbolDataset, generate
from pixel_eql.dataset.weights import label_weights
from pixel_eql.envs import make_env
from pixel_eql.eql.export import PolicyDocument, load_policy, save_policy
from pixel_eql.eql.extract import extract, relevant_variables
from pixel_eql.eql.network import prune
from pixel_eql.errors import ConfigError, ContractError, FormatError, MissingArtifactError
from pixel_eql.explain.gradients import decision_context
from pixel_eql.explain.grounding import PolicyDescription, TaskDescription, task_description
from pixel_eql.explain.llm_client import llm_chat, run_dialogue
from pixel_eql.explain.prompts import render_decision_prompt, render_policy_prompt
from pixel_eql.explain.settings import LLMSettings
from pixel_eql.gradsuite import run_grad_suite
from pixel_eql.models import CommandSummary
from pixel_eql.perception.network import PerceptionNet
from pixel_eql.perception.pretrain import evaluate_perception, pretrain
from pixel_eql.reporting import write_summary
from pixel_eql.variables import objects_of, variable_names

logger = logging.getLogger(__name__)

DATASET_DIR = "dataset"
PERCEPTION_FILE = "perception.pcp"
AGENT_FILE = "agent.agt"
POLICY_FILE = "policy.json"

# ---------------- helpers ----------------


def _clean(value: float) -> Optional[float]:
    value = float(value)
    return None if math.isnan(value) or math.isinf(value) else value


def _last_finite(values: Iterable[float]) -> float:
    finite = [v for v in values if math.isfinite(v)]
    return finite[-1] if finite else float("nan")


def _rel(path: Path, out_dir: Path) -> str:
    try:
        return path.relative_to(out_dir).as_posix()
    except ValueError:
        return path.as_posix()


def _start(command: str, config: RunConfig, env_id: Optional[str] = None) -> tuple[CommandSummary, float]:
    seed_everything(config.seed)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    summary = CommandSummary(command=command, seed=config.seed, env_id=env_id or config.env.env_id)
    logger.info("%s: writing to %s", command, config.out_dir)
    return summary, time.perf_counter()


def _finish(summary: CommandSummary, config: RunConfig, started: float) -> CommandSummary:
    path = write_resolved_config(config, config.out_dir)
    summary.artifacts.setdefault("resolved_config", _rel(path, config.out_dir))
    summary.metadata.finished_at = datetime.now(timezone.utc)
    summary.metadata.timings["seconds"] = time.perf_counter() - started
    write_summary(summary, config.out_dir)
    return summary


def _write_csv(path: Path, fields: Iterable[str], rows: Iterable[dict]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fields))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return path


def _check_env(expected: EnvConfig, env_id: str, what: str) -> None:
    if env_id != expected.env_id:
        raise ConfigError(f"{what} was built for {env_id}, but the config selects {expected.env_id}")


def _load_dataset(config: RunConfig) -> FrameSymbolDataset:
    dataset = storage.load(config.out_dir / DATASET_DIR)
    _check_env(config.env, dataset.env.env_id, "The dataset")
    return dataset


def _perception_for(config: RunConfig) -> PerceptionNet:
    """Pre-trained perception, or a fresh one for the no-pretrain variant."""
    if config.ppo.variant == "no_pretrain":
        logger.info("Training with an untrained perception network")
        env = config.env
        return PerceptionNet(config.perception, env.frame_size, env.frame_stack, env.max_objects).to(
            config.torch_dtype
        )
    net, metadata = load_perception(config.out_dir / PERCEPTION_FILE)
    _check_env(config.env, metadata.get("env_id", ""), "The perception checkpoint")
    shape = (net.frame_size, net.frame_stack, net.max_objects)
    wanted = (config.env.frame_size, config.env.frame_stack, config.env.max_objects)
    if shape != wanted:
        raise ConfigError(
            f"Perception checkpoint expects (frame_size, frame_stack, max_objects) = {shape}, config has {wanted}"
        )
    return net.to(config.torch_dtype)


# ---------------- gen-dataset ----------------


def run_gen_dataset(config: RunConfig) -> CommandSummary:
    summary, started = _start("gen-dataset", config)
    dataset = generate(config.env, config.dataset.n_frames, config.dataset.behavior, config.seed)
    path = storage.save(dataset, config.out_dir / DATASET_DIR)
    summary.artifacts["dataset"] = _rel(path, config.out_dir)
    summary.metrics.update(
        n_samples=len(dataset),
        n_train=len(dataset.train_idx),
        n_test=len(dataset.test_idx),
    )
    present = dataset.exist.reshape(-1, dataset.max_objects).mean(axis=0)
    summary.notes.append(
        "Presence frequency: "
        + ", ".join(f"{name} {freq:.3f}" for name, freq in zip(dataset.object_names, present))
    )
    return _finish(summary, config, started)


# ---------------- pretrain ----------------


def run_pretrain(config: RunConfig) -> CommandSummary:
    summary, started = _start("pretrain", config)
    dataset = _load_dataset(config)
    dtype = config.torch_dtype
    net = PerceptionNet(config.perception, dataset.frame_size, dataset.frame_stack, dataset.max_objects).to(dtype)
    eta_bar = label_weights(dataset.exist, config.dataset.alpha, config.dataset.beta).eta_bar

    result = pretrain(net, dataset, config.perception, seed=config.seed, eta_bar=eta_bar, dtype=dtype)
    curve = _write_csv(
        config.out_dir / "pretrain_curve.csv",
        ("epoch", "train_loss", "test_loss", "test_mae", "test_exist_accuracy"),
        (asdict(row) for row in result.curve),
    )
    checkpoint = save_perception(
        config.out_dir / PERCEPTION_FILE, net, tuple(dataset.object_names), dataset.env.env_id
    )
    final = evaluate_perception(net, dataset, dataset.test_idx, eta_bar, dtype)
    summary.artifacts.update(perception=_rel(checkpoint, config.out_dir), curve=_rel(curve, config.out_dir))
    summary.metrics.update(
        test_loss=_clean(final.loss),
        test_mae=_clean(final.mae),
        test_exist_accuracy=_clean(final.exist_accuracy),
    )
    if config.perception.epochs == 0:
        summary.notes.append("epochs = 0: the checkpoint holds the untrained network")
    return _finish(summary, config, started)


# ---------------- train ----------------


def run_train(config: RunConfig) -> CommandSummary:
    summary, started = _start("train", config)
    summary.variant = config.ppo.variant
    perception = _perception_for(config)
    dataset: Optional[FrameSymbolDataset]
    try:
        dataset = _load_dataset(config)
    except MissingArtifactError:
        dataset = None
        summary.notes.append("No symbol dataset found; perception is supervised on rollout symbols")

    result = train(config, perception, dataset, config.out_dir)
    env = make_env(config.env)
    checkpoint = save_agent(
        config.out_dir / AGENT_FILE,
        result.perception,
        result.actors,
        object_names=tuple(env.object_names),
        env=config.env.model_dump(mode="json"),
        extra={"total_steps": config.ppo.total_steps, "updates": len(result.logs)},
    )
    logs = result.logs
    summary.artifacts.update(agent=_rel(checkpoint, config.out_dir), train_log="train_log.csv")
    summary.metrics.update(
        steps=logs[-1].global_step if logs else 0,
        mean_return=_clean(_last_finite(r.mean_return for r in logs)),
        final_loss_ng=_clean(logs[-1].loss_ng) if logs else None,
        final_lambda_reg=_clean(logs[-1].lambda_reg) if logs else None,
        f_mae=_clean(_last_finite(r.f_mae for r in logs)),
        mae_before=_clean(result.mae_before),
        mae_after=_clean(result.mae_after),
    )
    return _finish(summary, config, started)


# ---------------- eval ----------------


def run_eval(config: RunConfig, episodes: int = 10, mode: Mode = "neural", greedy: bool = False) -> CommandSummary:
    """Evaluate the trained agent, or a uniform random policy without loading anything."""
    summary, started = _start("eval", config)
    actors = perception = None
    env_config = config.env
    threshold = config.perception.existence_threshold
    if mode != "random":
        perception, actors, metadata = load_agent(config.out_dir / AGENT_FILE)
        summary.variant = metadata.get("variant")
        try:
            env_config = EnvConfig.model_validate(metadata["env"])
        except (KeyError, ValidationError) as exc:
            raise FormatError(f"Agent checkpoint has no usable env section: {exc}") from exc
        threshold = float(metadata["perception"]["config"].get("existence_threshold", threshold))
        summary.env_id = env_config.env_id

    result = evaluate(actors, perception, env_config, episodes, mode, greedy, config.seed, threshold)
    path = _write_csv(
        config.out_dir / f"eval_returns-{mode}.csv",
        ("episode", "return"),
        ({"episode": i + 1, "return": r} for i, r in enumerate(result.returns)),
    )
    summary.artifacts["returns"] = _rel(path, config.out_dir)
    summary.metrics.update(
        episodes=result.episodes,
        steps=result.steps,
        mean_return=_clean(result.mean),
        std_return=_clean(result.std),
    )
    summary.metadata.timings["seconds_per_step"] = result.seconds_per_step
    summary.notes.append(f"Actor: {mode}{' (greedy)' if greedy else ''}")
    return _finish(summary, config, started)


# ---------------- extract ----------------


def run_extract(config: RunConfig) -> CommandSummary:
    summary, started = _start("extract", config)
    perception, actors, metadata = load_agent(config.out_dir / AGENT_FILE)
    summary.variant = metadata.get("variant")
    if actors.eql is None:
        raise ContractError("This agent has no EQL actor to extract (coor_neural variant)")
    env_id = metadata["env"]["env_id"]
    summary.env_id = env_id
    object_names = tuple(metadata["perception"]["object_names"])
    names = variable_names(object_names, perception.frame_stack)
    env = make_env(EnvConfig.model_validate(metadata["env"]))

    policy = extract(prune(actors.eql, config.eql.prune_threshold), names, env.action_names)
    used = relevant_variables(policy)
    relevant = sorted(objects_of(used, object_names))
    document = PolicyDocument.from_policy(
        policy,
        env_id=env_id,
        temperature=float(actors.eql.temperature),
        logits_per_action=actors.eql.groups,
        actions=env.action_names,
        variables=names,
        relevant_objects=[object_names[j] for j in relevant],
    )
    json_path, text_path = save_policy(document, config.out_dir, config.eql.sig_digits)
    summary.artifacts.update(policy=_rel(json_path, config.out_dir), policy_text=_rel(text_path, config.out_dir))
    summary.metrics.update(
        n_terms=sum(len(expr.terms) for expr in policy.values()),
        n_relevant_variables=len(used),
    )
    summary.notes.append("Relevant objects: " + (", ".join(document.relevant_objects) or "none"))
    return _finish(summary, config, started)


# ---------------- explain ----------------


def _save_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def run_explain(
    config: RunConfig,
    *,
    settings: Optional[LLMSettings] = None,
    http_client: Optional[httpx.Client] = None,
) -> CommandSummary:
    """
    Render the policy-analysis dialogue and decision prompts, then send them or
    write them to ``outbox/`` when offline.
    """
    summary, started = _start("explain", config)
    document = load_policy(config.out_dir / POLICY_FILE)
    perception, actors, metadata = load_agent(config.out_dir / AGENT_FILE)
    if actors.eql is None:
        raise ContractError("This agent has no EQL actor to explain")
    env_config = EnvConfig.model_validate(metadata["env"])
    summary.env_id = env_config.env_id
    summary.variant = metadata.get("variant")
    object_names = tuple(metadata["perception"]["object_names"])
    sig = config.eql.sig_digits

    task = task_description(env_config.env_id, env_config.frame_stack, object_names, env_config.win_score)
    description = PolicyDescription.from_document(document, sig)
    prompts_dir = config.out_dir / "prompts"
    outbox = config.out_dir / "outbox"
    responses_dir = config.out_dir / "responses"
    endpoint = config.explain

    turns = render_policy_prompt(task, description)
    for i, turn in enumerate(turns, start=1):
        _save_text(prompts_dir / f"policy_turn_{i}.txt", turn)
    replies = run_dialogue(turns, endpoint, outbox=outbox, settings=settings, http_client=http_client)

    decisions = _decision_prompts(config, perception, actors, env_config, document, task, description)
    for i, prompt in enumerate(decisions, start=1):
        _save_text(prompts_dir / f"decision_{i}.txt", prompt)
        reply = llm_chat(
            [{"role": "user", "content": prompt}],
            endpoint,
            outbox=outbox,
            settings=settings,
            http_client=http_client,
        )
        replies.append(reply)

    if endpoint.offline:
        summary.artifacts["outbox"] = "outbox"
        summary.notes.append("Offline: prompts were written to the outbox; no request was sent")
    else:
        names = [f"policy_turn_{i}" for i in range(1, len(turns) + 1)]
        names += [f"decision_{i}" for i in range(1, len(decisions) + 1)]
        for name, reply in zip(names, replies):
            _save_text(responses_dir / f"{name}.txt", str(reply))
        summary.artifacts["responses"] = "responses"
    summary.artifacts["prompts"] = "prompts"
    summary.metrics["n_prompts"] = len(turns) + len(decisions)
    return _finish(summary, config, started)


def _decision_prompts(
    config: RunConfig,
    perception: PerceptionNet,
    actors: Actors,
    env_config: EnvConfig,
    document: PolicyDocument,
    task: TaskDescription,
    description: PolicyDescription,
) -> list[str]:
    """Play the greedy EQL policy and render one prompt per visited decision."""
    env = make_env(env_config.model_copy(update={"seed": config.seed}))
    obs = env.reset(seed=config.seed)
    dtype = perception.embed[0].weight.dtype
    threshold = config.perception.existence_threshold
    perception.eval()
    actors.eval()
    prompts = []
    for _ in range(config.explain.decision_samples):
        frames = unit_frames(obs.frames[None], dtype)
        with torch.no_grad():
            outputs = policy_forward(actors, perception, frames, threshold)
        action = int(torch.argmax(outputs.log_probs("eql")[0]))
        coords = outputs.coords[0].double().numpy()
        context = decision_context(actors.eql, coords, action, document.variables, document.actions)
        prompts.append(render_decision_prompt(task, description, context))
        step = env.step(action)
        obs = env.reset() if step.done else step.observation
    return prompts


# ---------------- grad-check ----------------


def run_grad_check(
    config: RunConfig,
    instances: int = 100,
    tolerance: float = 1e-5,
) -> CommandSummary:
    summary, started = _start("grad-check", config)
    rows = run_grad_suite(instances=instances, tolerance=tolerance, seed=config.seed)
    summary.grad_checks = rows
    failed = [row.name for row in rows if not row.passed]
    summary.metrics["max_rel_error"] = max(row.max_rel_error for row in rows)
    if failed:
        summary.notes.append("Failed: " + ", ".join(failed))
    return _finish(summary, config, started)
