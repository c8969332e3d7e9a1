from __future__ import annotations

import copy
import csv
import math
from pathlib import Path

import pytest
import torch

from pixel_eql.agent import evaluate, load_agent, save_agent, train
from pixel_eql.config import apply_overrides, validate_config
from pixel_eql.dataset import generate
from pixel_eql.perception import PerceptionNet, pretrain


def fresh_perception(config) -> PerceptionNet:
    torch.manual_seed(config.seed)
    env = config.env
    return PerceptionNet(config.perception, env.frame_size, env.frame_stack, env.max_objects)


def run(config, dataset=None, out_dir=None):
    torch.manual_seed(config.seed)
    return train(config, fresh_perception(config), dataset, out_dir)


def test_two_runs_with_the_same_seed_log_the_same(tiny_run_config):
    first, second = run(tiny_run_config), run(tiny_run_config)
    assert len(first.logs) == tiny_run_config.ppo.num_updates == 2
    assert repr(first.logs) == repr(second.logs)


def test_log_file_has_one_row_per_update(tmp_path: Path, tiny_run_config):
    run(tiny_run_config, out_dir=tmp_path)
    with (tmp_path / "train_log.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [row["update"] for row in rows] == ["1", "2"]
    assert float(rows[0]["lambda_reg"]) == 0.0
    assert float(rows[1]["lambda_reg"]) == pytest.approx(tiny_run_config.ppo.lambda_reg / 2)


def test_single_inner_iteration_always_uses_the_joint_loss(tiny_run_config):
    config = apply_overrides(tiny_run_config, {"ppo.inner_iterations": 1})
    result = run(config)
    assert all(math.isfinite(row.loss_ng) and math.isfinite(row.loss_reg) for row in result.logs)


def test_dataset_supervises_perception_and_reports_mae(tiny_run_config):
    dataset = generate(tiny_run_config.env, 40, seed=0)
    result = run(tiny_run_config, dataset)
    assert math.isfinite(result.mae_before) and math.isfinite(result.mae_after)
    assert math.isfinite(result.logs[-1].loss_cnn)


def test_fixed_variant_leaves_perception_untouched(tiny_run_config):
    config = apply_overrides(tiny_run_config, {"ppo.variant": "fixed"})
    perception = fresh_perception(config)
    before = {k: v.clone() for k, v in perception.state_dict().items()}
    torch.manual_seed(config.seed)
    result = train(config, perception)
    assert all(torch.equal(before[k], v) for k, v in result.perception.state_dict().items())
    assert all(math.isnan(row.loss_cnn) for row in result.logs)


@pytest.mark.parametrize(("variant", "ng", "reg"), [("no_ng", False, True), ("coor_neural", False, False)])
def test_ablations_log_only_their_terms(tiny_run_config, variant, ng, reg):
    result = run(apply_overrides(tiny_run_config, {"ppo.variant": variant}))
    last = result.logs[-1]
    assert math.isfinite(last.loss_ng) == ng
    assert math.isfinite(last.loss_reg) == reg


def test_agent_round_trip(tmp_path: Path, tiny_run_config):
    result = run(tiny_run_config)
    path = save_agent(
        tmp_path / "agent.agt",
        result.perception,
        result.actors,
        object_names=("ball", "agent", "opponent"),
        env=tiny_run_config.env.model_dump(mode="json"),
    )
    perception, actors, metadata = load_agent(path)
    assert metadata["variant"] == "full"
    assert metadata["perception"]["object_names"] == ["ball", "agent", "opponent"]
    original = evaluate(result.actors, result.perception, tiny_run_config.env, 2, mode="eql", seed=1)
    reloaded = evaluate(actors, perception, tiny_run_config.env, 2, mode="eql", seed=1)
    assert original.returns == reloaded.returns


@pytest.mark.slow
@pytest.mark.timeout(3600)
def test_symbolic_actor_keeps_up_with_neural_actor():
    config = validate_config({"seed": 0, "env": {"env_id": "MiniPong", "max_objects": 3}})
    dataset = generate(config.env, 10_000, seed=0)
    perception = fresh_perception(config)
    pretrain(perception, dataset, config.perception, seed=0)
    result = train(config, perception, dataset)
    neural = evaluate(result.actors, result.perception, config.env, 20, mode="neural", seed=1)
    symbolic = evaluate(result.actors, result.perception, config.env, 20, mode="eql", seed=1)
    assert symbolic.mean >= 0.9 * neural.mean


def _late_fmae(result, last: int = 5) -> float:
    values = [row.f_mae for row in result.logs if math.isfinite(row.f_mae)]
    return sum(values[-last:]) / len(values[-last:])


@pytest.mark.slow
@pytest.mark.timeout(7200)
def test_frozen_perception_tracks_relevant_objects_no_better():
    full_errors, frozen_errors = [], []
    for seed in range(3):
        config = validate_config(
            {
                "seed": seed,
                "env": {"env_id": "MiniCrossing"},
                "ppo": {"total_steps": 50_000, "fmae_interval": 1},
            }
        )
        dataset = generate(config.env, 2_000, seed=seed)
        perception = fresh_perception(config)
        pretrain(perception, dataset, config.perception, seed=seed)

        frozen = apply_overrides(config, {"ppo.variant": "fixed"})
        torch.manual_seed(seed)
        full_errors.append(_late_fmae(train(config, copy.deepcopy(perception), dataset)))
        torch.manual_seed(seed)
        frozen_errors.append(_late_fmae(train(frozen, copy.deepcopy(perception), dataset)))
    assert sum(frozen_errors) / 3 >= sum(full_errors) / 3
