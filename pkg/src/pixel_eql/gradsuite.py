# pixel_eql/gradsuite.py
"""
Finite-difference check of every differentiable objective.

Each instance is a tiny, freshly seeded model in double precision with tanh
activations. Heads are biased away from the existence threshold, the clip
bounds and the L1 kinks, and PPO ratios are kept off the clip edges, so the
objectives are smooth around the sampled points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch

from pixel_eql.agent.actors import Actors
from pixel_eql.agent.losses import Minibatch, ng_loss, ppo_objective
from pixel_eql.config import ConvSpec, EQLConfig, PerceptionConfig
from pixel_eql.core.gradcheck import compare_parameter_gradients
from pixel_eql.core.rng import numpy_rng
from pixel_eql.eql.network import reg_loss
from pixel_eql.models import GradCheckRow
from pixel_eql.perception.losses import SymbolBatch, loss_cnn, loss_coor, loss_exist, loss_size
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)

CHECKS = ("L_exist", "L_coor", "L_size", "L_cnn", "L_reg", "eql_forward", "L_ng", "L_ppo", "total")

FRAME_SIZE = 8
FRAME_STACK = 2
MAX_OBJECTS = 2
BATCH = 4
N_ACTIONS = 3
CLIP_EPS = 0.1
REG_SMOOTHING = 0.05


@dataclass
class TinyInstance:
    perception: PerceptionNet
    actors: Actors
    symbols: SymbolBatch
    minibatch: Minibatch
    target: torch.Tensor  # fixed neural distribution for guidance
    projection: torch.Tensor
    inputs: torch.Tensor


def _away_from(values: torch.Tensor, rng: np.random.Generator, low: float, high: float) -> torch.Tensor:
    """Targets at a random signed distance in [low, high] from ``values``."""
    sign = torch.as_tensor(rng.choice([-1.0, 1.0], size=values.shape))
    gap = torch.as_tensor(rng.uniform(low, high, size=values.shape))
    return values.detach() + sign * gap


def tiny_instance(seed: int) -> TinyInstance:
    torch.manual_seed(seed)
    rng = numpy_rng(seed, "gradsuite")
    config = PerceptionConfig(
        conv=[ConvSpec(kernel=3, stride=2, padding=1, channels=3), ConvSpec(kernel=3, stride=2, padding=1, channels=3)],
        hidden_dim=6,
        head_hidden=6,
        activation="tanh",
    )
    perception = PerceptionNet(config, FRAME_SIZE, FRAME_STACK, MAX_OBJECTS).double()
    eql_config = EQLConfig(repetitions=1, temperature=2.0)
    actors = Actors("full", perception.hidden_dim, perception.n_variables, N_ACTIONS, eql_config, actor_hidden=6).double()

    with torch.no_grad():
        # Existence logits near +-3, coordinates and sizes near 0.5.
        exist_out = perception.exist_head[2]
        exist_out.weight.mul_(0.1)
        exist_out.bias.copy_(torch.as_tensor(rng.choice([-3.0, 3.0], size=exist_out.bias.shape)))
        for head in (perception.coord_head[2], perception.size_head[2]):
            head.weight.mul_(0.1)
            head.bias.fill_(0.5)
        # Keep EQL parameters off the regularizer's branch point.
        for p in actors.eql.parameters():
            near = ((p.abs() - REG_SMOOTHING).abs() < 2e-3)
            p[near] += 5e-3 * torch.sign(p[near])

    frames = torch.as_tensor(rng.uniform(0.0, 1.0, size=(BATCH, FRAME_STACK, FRAME_SIZE, FRAME_SIZE)))
    with torch.no_grad():
        out = perception(frames)
        exist = torch.as_tensor(rng.integers(0, 2, size=(BATCH, FRAME_STACK, MAX_OBJECTS)), dtype=torch.float64)
        symbols = SymbolBatch(
            frames=frames,
            exist=exist,
            coords=_away_from(out.coords_raw, rng, 0.02, 0.4),
            sizes=_away_from(out.sizes_raw, rng, 0.02, 0.4),
            weights=torch.as_tensor(rng.uniform(0.1, 1.1, size=exist.shape)),
        )
        neural = actors.neural(out.hidden)
        actions = torch.as_tensor(rng.integers(0, N_ACTIONS, size=BATCH), dtype=torch.long)
        taken = neural.gather(-1, actions[:, None]).squeeze(-1)
        # Ratios inside the trust region or well outside it, never on its edge.
        ratios = rng.choice([0.7, 0.8, 0.95, 1.0, 1.05, 1.2, 1.3], size=BATCH)
        old = taken - torch.as_tensor(np.log(ratios))
        target = neural.exp()

    minibatch = Minibatch(
        frames=frames,
        actions=actions,
        old_log_probs=old,
        advantages=torch.as_tensor(rng.normal(size=BATCH)),
        returns=torch.as_tensor(rng.normal(size=BATCH)),
    )
    inputs = torch.as_tensor(rng.uniform(0.0, 1.0, size=(BATCH, perception.n_variables))).requires_grad_(True)
    projection = torch.as_tensor(rng.normal(size=(N_ACTIONS * eql_config.logits_per_action,)))
    return TinyInstance(perception, actors, symbols, minibatch, target, projection, inputs)


def _objectives(inst: TinyInstance) -> dict[str, tuple[Callable[[], torch.Tensor], list[torch.Tensor]]]:
    perception, actors, symbols, mb = inst.perception, inst.actors, inst.symbols, inst.minibatch
    assert actors.eql is not None and actors.neural is not None
    perception_params = list(perception.parameters())
    eql_params = list(actors.eql.parameters())
    ppo_params = perception_params + list(actors.neural.parameters()) + list(actors.critic.parameters())

    def l_exist() -> torch.Tensor:
        return loss_exist(perception(symbols.frames).exist_prob, symbols.exist, symbols.weights)

    def l_coor() -> torch.Tensor:
        return loss_coor(perception(symbols.frames).coords_raw, symbols.coords, symbols.exist)

    def l_size() -> torch.Tensor:
        return loss_size(perception(symbols.frames).sizes_raw, symbols.sizes, symbols.exist[:, -1])

    def l_cnn() -> torch.Tensor:
        return loss_cnn(perception(symbols.frames), symbols)

    def l_reg() -> torch.Tensor:
        return reg_loss(actors.eql, REG_SMOOTHING)

    def eql_forward() -> torch.Tensor:
        return (actors.eql(inst.inputs).logits * inst.projection).sum()

    def l_ng() -> torch.Tensor:
        coords = perception(mb.frames).masked_coords()
        return ng_loss(inst.target, actors.eql(coords).log_probs)

    def l_ppo() -> torch.Tensor:
        out = perception(mb.frames)
        return ppo_objective(actors.neural(out.hidden), actors.critic(out.hidden), mb, CLIP_EPS).loss

    def total() -> torch.Tensor:
        return l_ppo() + l_ng() + 1e-3 * l_reg() + 2.0 * l_cnn()

    return {
        "L_exist": (l_exist, perception_params),
        "L_coor": (l_coor, perception_params),
        "L_size": (l_size, perception_params),
        "L_cnn": (l_cnn, perception_params),
        "L_reg": (l_reg, eql_params),
        "eql_forward": (eql_forward, eql_params + [inst.inputs]),
        "L_ng": (l_ng, eql_params + perception_params),
        "L_ppo": (l_ppo, ppo_params),
        "total": (total, list(perception.parameters()) + list(actors.parameters())),
    }


def run_grad_suite(
    instances: int = 100,
    tolerance: float = 1e-5,
    max_coords: int = 12,
    eps: float = 1e-6,
    seed: int = 0,
) -> list[GradCheckRow]:
    """Worst relative error per objective over ``instances`` random tiny models."""
    worst = {name: 0.0 for name in CHECKS}
    for i in range(instances):
        inst = tiny_instance(seed * 100_003 + i)
        for name, (loss_fn, params) in _objectives(inst).items():
            err = compare_parameter_gradients(
                loss_fn, params, eps=eps, max_coords=max_coords, rng=numpy_rng(seed, "coords", i, name)
            )
            worst[name] = max(worst[name], err)
        logger.debug("instance %s: %s", i, worst)
    rows = [GradCheckRow(name=n, instances=instances, max_rel_error=worst[n], tolerance=tolerance) for n in CHECKS]
    for row in rows:
        logger.info("%-12s max rel err %.3e (%s)", row.name, row.max_rel_error, "ok" if row.passed else "FAIL")
    return rows
