from __future__ import annotations

import json
from pathlib import Path

import pytest

from pixel_eql.cli import build_parser, main
from pixel_eql.config import render_resolved_config


@pytest.fixture
def config_file(tmp_path: Path, tiny_run_config) -> Path:
    path = tmp_path / "tiny.toml"
    path.write_text(render_resolved_config(tiny_run_config), encoding="utf-8")
    return path


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "pixel-eql" in capsys.readouterr().out


def test_a_subcommand_is_required():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_variant_flags_are_exclusive():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["train", "--no-pretrain", "--coor-neural"])


def test_gen_dataset(tmp_path: Path, config_file: Path):
    out = tmp_path / "cli-run"
    assert main(["gen-dataset", "-c", str(config_file), "-o", str(out), "--n-frames", "20", "--seed", "3"]) == 0
    summary = json.loads((out / "summary-gen-dataset.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 3
    assert summary["metrics"]["n_samples"] == 20
    assert "n_frames = 20" in (out / "resolved_config.toml").read_text(encoding="utf-8")


def test_missing_artifact_exit_code(tmp_path: Path, config_file: Path, capsys):
    assert main(["pretrain", "-c", str(config_file), "-o", str(tmp_path / "empty")]) == 3
    assert "gen-dataset" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path: Path):
    path = tmp_path / "bad.toml"
    path.write_text("unknown_key = 1\n", encoding="utf-8")
    assert main(["gen-dataset", "-c", str(path)]) == 2


def test_grad_check(tmp_path: Path, config_file: Path):
    out = tmp_path / "grad"
    assert main(["grad-check", "-c", str(config_file), "-o", str(out), "--instances", "2"]) == 0
    summary = json.loads((out / "summary-grad-check.json").read_text(encoding="utf-8"))
    assert len(summary["grad_checks"]) == 9


def test_failed_grad_check_exit_code(tmp_path: Path, config_file: Path):
    out = tmp_path / "grad"
    assert main(["grad-check", "-c", str(config_file), "-o", str(out), "--instances", "1", "--tolerance", "0"]) == 5


def test_random_eval(tmp_path: Path, config_file: Path):
    out = tmp_path / "eval"
    assert main(["eval", "-c", str(config_file), "-o", str(out), "--mode", "random", "--episodes", "1"]) == 0
    assert (out / "eval_returns-random.csv").is_file()


@pytest.mark.slow
def test_end_to_end(tmp_path: Path, config_file: Path):
    out = str(tmp_path / "e2e")
    common = ["-c", str(config_file), "-o", out]
    for command in (["gen-dataset"], ["pretrain"], ["train"], ["eval", "--mode", "eql"], ["extract"], ["explain", "--offline"]):
        assert main([*command, *common]) == 0, command
    assert (Path(out) / "policy.txt").is_file()
