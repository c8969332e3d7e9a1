# pixel_eql/agent/trainer.py
"""
Joint training of perception, neural actor, critic and EQL actor.

Each update collects one batch of experience, then runs ``inner_iterations``
epochs of minibatch steps with a single Adam optimizer over every trainable
parameter. Only the last epoch adds the guidance, sparsity and perception
terms; the sparsity weight is annealed upward across updates.
"""

from __future__ import annotations

import copy
import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from pixel_eql.agent.actors import Actors
from pixel_eql.agent.losses import LossTerms, Minibatch, anneal, compute_losses
from pixel_eql.agent.persistence import save_agent
from pixel_eql.agent.rollout import RolloutBatch, RolloutCollector, gae, normalize
from pixel_eql.config import RunConfig
from pixel_eql.core.rng import numpy_rng
from pixel_eql.core.tensor import unit_frames
from pixel_eql.dataset.generate import FrameSymbolDataset
from pixel_eql.dataset.weights import label_weights
from pixel_eql.eql.extract import extract, relevant_variables
from pixel_eql.eql.network import prune
from pixel_eql.errors import DegenerateDataError, TrainingDivergedError, UndefinedMetricError
from pixel_eql.metrics import f_mae, mae
from pixel_eql.perception.losses import SymbolBatch
from pixel_eql.perception.network import PerceptionNet
from pixel_eql.perception.pretrain import predict_coords
from pixel_eql.variables import objects_of, variable_names

logger = logging.getLogger(__name__)

LOG_FIELDS = (
    "update",
    "global_step",
    "episodes",
    "mean_return",
    "lambda_reg",
    "loss_total",
    "loss_ppo",
    "loss_ng",
    "loss_reg",
    "loss_cnn",
    "entropy",
    "approx_kl",
    "clip_fraction",
    "mae",
    "f_mae",
)


@dataclass
class UpdateLog:
    update: int
    global_step: int
    episodes: int
    mean_return: float
    lambda_reg: float
    loss_total: float
    loss_ppo: float
    loss_ng: float
    loss_reg: float
    loss_cnn: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    mae: float
    f_mae: float


@dataclass
class TrainResult:
    perception: PerceptionNet
    actors: Actors
    logs: list[UpdateLog] = field(default_factory=list)
    # Test-split coordinate error of the perception network before and after
    # policy learning; NaN without a symbol dataset.
    mae_before: float = float("nan")
    mae_after: float = float("nan")


def build_actors(config: RunConfig, perception: PerceptionNet, n_actions: int) -> Actors:
    return Actors(
        variant=config.ppo.variant,
        hidden_dim=perception.hidden_dim,
        n_variables=perception.n_variables,
        n_actions=n_actions,
        eql_config=config.eql,
        actor_hidden=config.ppo.actor_hidden,
    )


class Trainer:
    """
    Runs the policy-learning loop for one configuration.

    Args:
        config: the full run configuration; ``config.ppo.variant`` picks the ablation.
        perception: pre-trained (or fresh) perception network, trained in place
            unless the variant freezes it.
        dataset: symbol dataset for the perception term. Without one, oracle
            symbols from the rollouts are used.
        out_dir: where ``train_log.csv`` and ``last_good.agt`` go; ``None`` keeps
            everything in memory.
    """

    def __init__(
        self,
        config: RunConfig,
        perception: PerceptionNet,
        dataset: Optional[FrameSymbolDataset] = None,
        out_dir: Optional[Path] = None,
        object_names: tuple[str, ...] = (),
    ) -> None:
        self.config = config
        self.dtype = config.torch_dtype
        self.dataset = dataset
        self.out_dir = out_dir
        self.seed = config.seed

        self.collector = RolloutCollector(
            config.env,
            n_envs=config.ppo.n_envs,
            seed=config.seed,
            gamma=config.ppo.gamma,
            threshold=config.perception.existence_threshold,
            dtype=self.dtype,
        )
        env = self.collector.envs[0]
        self.object_names = object_names or env.object_names
        self.action_names = env.action_names
        self.variables = variable_names(self.object_names, config.env.frame_stack)

        self.perception = perception.to(self.dtype)
        self.actors = build_actors(config, perception, env.n_actions).to(self.dtype)
        self.train_perception = config.ppo.variant != "fixed"
        self.perception.requires_grad_(self.train_perception)
        self.params = [
            p for p in list(self.perception.parameters()) + list(self.actors.parameters()) if p.requires_grad
        ]
        self.optimizer = torch.optim.Adam(
            self.params, lr=config.ppo.learning_rate, eps=config.ppo.adam_eps
        )

        self.eta_bar: Optional[np.ndarray] = None
        if dataset is not None and not config.ppo.online_symbol_labels:
            self.eta_bar = label_weights(dataset.exist, config.dataset.alpha, config.dataset.beta).eta_bar

    # ---------------- helpers ----------------

    def _symbol_batch(self, batch: RolloutBatch, update: int, iteration: int, step: int) -> Optional[SymbolBatch]:
        if not self.train_perception:
            return None
        rng = numpy_rng(self.seed, "symbols", update, iteration, step)
        size = self.config.ppo.symbol_batch_size
        if self.dataset is not None and self.eta_bar is not None:
            idx = np.sort(rng.choice(self.dataset.train_idx, size=min(size, len(self.dataset.train_idx)), replace=False))
            return SymbolBatch.from_dataset(self.dataset, idx, self.eta_bar, self.dtype)
        exist = batch.flatten("exist")
        try:
            weights = label_weights(exist, self.config.dataset.alpha, self.config.dataset.beta).eta_bar
        except DegenerateDataError:
            return None
        idx = np.sort(rng.choice(len(exist), size=min(size, len(exist)), replace=False))
        return SymbolBatch.from_arrays(
            batch.flatten("frames")[idx],
            exist[idx],
            batch.flatten("coords")[idx],
            batch.flatten("sizes")[idx],
            weights[idx],
            dtype=self.dtype,
        )

    def _tensors(self, batch: RolloutBatch, advantages: np.ndarray, returns: np.ndarray) -> dict[str, torch.Tensor]:
        return {
            "frames": torch.as_tensor(batch.flatten("frames")),
            "actions": torch.as_tensor(batch.flatten("actions"), dtype=torch.long),
            "old_log_probs": torch.as_tensor(batch.flatten("log_probs"), dtype=self.dtype),
            "advantages": torch.as_tensor(advantages.reshape(-1), dtype=self.dtype),
            "returns": torch.as_tensor(returns.reshape(-1), dtype=self.dtype),
        }

    def _minibatch(self, data: dict[str, torch.Tensor], idx: np.ndarray) -> Minibatch:
        index = torch.as_tensor(idx, dtype=torch.long)
        return Minibatch(
            frames=unit_frames(data["frames"][index], self.dtype),
            actions=data["actions"][index],
            old_log_probs=data["old_log_probs"][index],
            advantages=data["advantages"][index],
            returns=data["returns"][index],
        )

    def _snapshot(self) -> tuple[dict, dict]:
        return copy.deepcopy(self.perception.state_dict()), copy.deepcopy(self.actors.state_dict())

    def _diverged(self, snapshot: tuple[dict, dict], update: int, what: str) -> TrainingDivergedError:
        checkpoint = None
        if self.out_dir is not None:
            self.perception.load_state_dict(snapshot[0])
            self.actors.load_state_dict(snapshot[1])
            checkpoint = save_agent(
                self.out_dir / "last_good.agt",
                self.perception,
                self.actors,
                object_names=tuple(self.object_names),
                env=self.config.env.model_dump(mode="json"),
                extra={"update": update - 1},
            )
        return TrainingDivergedError(f"{what} became non-finite at update {update}", checkpoint)

    def relevant_objects(self) -> set[int]:
        """Object slots read by the pruned EQL policy."""
        if self.actors.eql is None:
            return set(range(len(self.object_names)))
        policy = extract(prune(self.actors.eql, self.config.eql.prune_threshold), self.variables, self.action_names)
        return objects_of(relevant_variables(policy), self.object_names)

    def _f_mae(self, batch: RolloutBatch) -> float:
        try:
            return f_mae(
                batch.flatten("pred_coords"),
                batch.flatten("coords"),
                batch.flatten("exist"),
                self.relevant_objects(),
                self.config.ppo.fmae_normalization,
            )
        except UndefinedMetricError as exc:
            logger.debug("F-MAE undefined: %s", exc)
            return float("nan")

    def _test_mae(self) -> float:
        if self.dataset is None:
            return float("nan")
        idx = self.dataset.test_idx
        coords, _ = predict_coords(self.perception, self.dataset.frames[idx], self.dtype)
        return mae(coords, self.dataset.coords[idx], self.dataset.exist[idx])

    # ---------------- main loop ----------------

    def train(self) -> TrainResult:
        ppo = self.config.ppo
        total_updates = ppo.num_updates
        result = TrainResult(perception=self.perception, actors=self.actors, mae_before=self._test_mae())
        global_step = 0
        log_path = None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            log_path = self.out_dir / "train_log.csv"
            with log_path.open("w", encoding="utf-8", newline="") as handle:
                csv.DictWriter(handle, fieldnames=LOG_FIELDS).writeheader()

        for update in range(1, total_updates + 1):
            snapshot = self._snapshot()
            lambda_reg = anneal(ppo.lambda_reg, update, total_updates)
            batch = self.collector.collect(self.actors, self.perception, ppo.batch_size)
            global_step += batch.size
            advantages, returns = gae(batch.rewards, batch.values, batch.dones, batch.last_values, ppo.gamma, ppo.gae_lambda)
            batch.advantages, batch.returns = advantages, returns
            if ppo.normalize_advantages:
                advantages = normalize(advantages)
            data = self._tensors(batch, advantages, returns)

            self.perception.train()
            self.actors.train()
            minibatch_size = batch.size // ppo.num_minibatches
            last_terms: Optional[LossTerms] = None
            for iteration in range(1, ppo.inner_iterations + 1):
                joint = iteration == ppo.inner_iterations
                order = numpy_rng(self.seed, "minibatch", update, iteration).permutation(batch.size)
                for step, start in enumerate(range(0, batch.size, minibatch_size)):
                    minibatch = self._minibatch(data, order[start : start + minibatch_size])
                    terms = compute_losses(
                        self.actors,
                        self.perception,
                        minibatch,
                        ppo=ppo,
                        eql=self.config.eql,
                        perception_config=self.config.perception,
                        lambda_reg=lambda_reg,
                        joint=joint,
                        symbol_batch=self._symbol_batch(batch, update, iteration, step) if joint else None,
                        train_perception=self.train_perception,
                    )
                    if not math.isfinite(float(terms.total)):
                        raise self._diverged(snapshot, update, "training loss")
                    self.optimizer.zero_grad()
                    terms.total.backward()
                    torch.nn.utils.clip_grad_norm_(self.params, ppo.max_grad_norm)
                    self.optimizer.step()
                    last_terms = terms

            assert last_terms is not None
            if any(not bool(torch.isfinite(p).all()) for p in self.params):
                raise self._diverged(snapshot, update, "parameters")

            want_fmae = update % ppo.fmae_interval == 0 or update == total_updates
            row = UpdateLog(
                update=update,
                global_step=global_step,
                episodes=len(batch.episode_returns),
                mean_return=float(np.mean(batch.episode_returns)) if batch.episode_returns else float("nan"),
                lambda_reg=lambda_reg,
                mae=mae(batch.flatten("pred_coords"), batch.flatten("coords"), batch.flatten("exist")),
                f_mae=self._f_mae(batch) if want_fmae else float("nan"),
                **{k: v for k, v in last_terms.as_floats().items() if k in LOG_FIELDS},
            )
            result.logs.append(row)
            if log_path is not None:
                with log_path.open("a", encoding="utf-8", newline="") as handle:
                    csv.DictWriter(handle, fieldnames=LOG_FIELDS).writerow(
                        {k: repr(v) if isinstance(v, float) else v for k, v in asdict(row).items()}
                    )
            logger.info(
                "update %s/%s step %s return %.3f ppo %.4f ng %.4f reg %.4f cnn %.4f mae %.4f",
                update, total_updates, global_step, row.mean_return, row.loss_ppo,
                row.loss_ng, row.loss_reg, row.loss_cnn, row.mae,
            )

        result.mae_after = self._test_mae()
        return result


def train(
    config: RunConfig,
    perception: PerceptionNet,
    dataset: Optional[FrameSymbolDataset] = None,
    out_dir: Optional[Path] = None,
) -> TrainResult:
    """Build a :class:`Trainer` and run it."""
    object_names = dataset.object_names if dataset is not None else ()
    return Trainer(config, perception, dataset, out_dir, object_names).train()
