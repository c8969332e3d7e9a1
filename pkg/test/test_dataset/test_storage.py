from __future__ import annotations

import json
from pathlib import Path

import pytest

from pixel_eql.config import EnvConfig
from pixel_eql.dataset import generate, storage
from pixel_eql.errors import FormatError, MissingArtifactError


@pytest.fixture(scope="module")
def dataset():
    return generate(EnvConfig(env_id="MiniCrossing", frame_size=16, frame_stack=2, max_objects=3), 12, seed=2)


def test_round_trip_is_exact(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path / "ds")
    assert storage.load(tmp_path / "ds") == dataset


def test_manifest_reports_split_and_schema(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["schema"] == "fsd-v1"
    assert manifest["byte_order"] == "little"
    assert len(manifest["split"]["train"]) == 10
    assert len(manifest["split"]["test"]) == 2
    assert manifest["object_names"] == ["agent", "car1", "car2"]


def test_saving_twice_is_byte_identical(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path / "a")
    storage.save(dataset, tmp_path / "b")
    for name in ("manifest.json", "frames.bin", "symbols.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_dataset_names_producer(tmp_path: Path):
    with pytest.raises(MissingArtifactError) as info:
        storage.load(tmp_path / "nothing")
    assert info.value.producer == "gen-dataset"
    assert "pixel-eql gen-dataset" in str(info.value)


def test_truncated_frames_report_byte_offset(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path)
    frames = tmp_path / "frames.bin"
    data = frames.read_bytes()
    frames.write_bytes(data[:100])
    with pytest.raises(FormatError, match="byte offset 100"):
        storage.load(tmp_path)


def test_bad_symbol_record_reports_byte_offset(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path)
    symbols = tmp_path / "symbols.jsonl"
    lines = symbols.read_bytes().splitlines(keepends=True)
    offset = len(lines[0])
    symbols.write_bytes(lines[0] + b"{not json\n" + b"".join(lines[2:]))
    with pytest.raises(FormatError, match=f"byte offset {offset}"):
        storage.load(tmp_path)


def test_wrong_schema_is_rejected(tmp_path: Path, dataset):
    storage.save(dataset, tmp_path)
    manifest_path = tmp_path / "manifest.json"
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest["schema"] = "fsd-v0"
    manifest_path.write_text(json.dumps(manifest), encoding="utf-8")
    with pytest.raises(FormatError, match="schema"):
        storage.load(tmp_path)
