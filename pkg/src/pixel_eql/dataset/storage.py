# pixel_eql/dataset/storage.py
"""
On-disk dataset layout.

A dataset directory holds three files:

- ``manifest.json``: schema tag, shapes, environment config and the split.
- ``frames.bin``: raw uint8 frames, C order, shape ``[N, K, S, S]``.
- ``symbols.jsonl``: one JSON object per sample with ``exist``, ``coords``
  and ``sizes``.

Floats are written with ``repr`` precision so a reload is bit-exact.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from pixel_eql.config import EnvConfig
from pixel_eql.dataset.generate import FrameSymbolDataset
from pixel_eql.errors import FormatError, MissingArtifactError

logger = logging.getLogger(__name__)

SCHEMA = "fsd-v1"
MANIFEST = "manifest.json"
FRAMES = "frames.bin"
SYMBOLS = "symbols.jsonl"


def save(dataset: FrameSymbolDataset, path: Path) -> Path:
    """Write ``dataset`` into directory ``path`` (created if needed)."""
    path.mkdir(parents=True, exist_ok=True)
    n, k, s, _ = dataset.frames.shape
    manifest: dict[str, Any] = {
        "schema": SCHEMA,
        "byte_order": "little",
        "frame_dtype": "uint8",
        "n_samples": n,
        "frame_stack": k,
        "frame_size": s,
        "max_objects": dataset.max_objects,
        "object_names": list(dataset.object_names),
        "env": dataset.env.model_dump(mode="json"),
        "split": {"train": dataset.train_idx.tolist(), "test": dataset.test_idx.tolist()},
    }
    (path / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (path / FRAMES).write_bytes(np.ascontiguousarray(dataset.frames, dtype=np.uint8).tobytes())
    with (path / SYMBOLS).open("w", encoding="utf-8", newline="\n") as handle:
        for i in range(n):
            record = {
                "i": i,
                "exist": dataset.exist[i].tolist(),
                "coords": dataset.coords[i].tolist(),
                "sizes": dataset.sizes[i].tolist(),
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    logger.info("Saved %s samples to %s", n, path)
    return path


# ---------------- loading ----------------


def _read_manifest(path: Path) -> dict[str, Any]:
    manifest_path = path / MANIFEST
    if not manifest_path.is_file():
        raise MissingArtifactError(manifest_path, "gen-dataset")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid JSON at byte offset {exc.pos}") from exc
    if manifest.get("schema") != SCHEMA:
        raise FormatError(f"{manifest_path}: unsupported schema {manifest.get('schema')!r}")
    required = ("n_samples", "frame_stack", "frame_size", "max_objects", "object_names", "env", "split")
    missing = [key for key in required if key not in manifest]
    if missing:
        raise FormatError(f"{manifest_path}: missing keys {missing}")
    return manifest


def _read_frames(path: Path, shape: tuple[int, ...]) -> np.ndarray:
    frames_path = path / FRAMES
    if not frames_path.is_file():
        raise MissingArtifactError(frames_path, "gen-dataset")
    raw = frames_path.read_bytes()
    expected = int(np.prod(shape))
    if len(raw) < expected:
        raise FormatError(
            f"{frames_path}: truncated at byte offset {len(raw)}, expected {expected} bytes"
        )
    if len(raw) > expected:
        raise FormatError(f"{frames_path}: trailing data after byte offset {expected}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(shape).copy()


def _read_symbols(path: Path, n: int, k: int, c: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    symbols_path = path / SYMBOLS
    if not symbols_path.is_file():
        raise MissingArtifactError(symbols_path, "gen-dataset")
    exist = np.zeros((n, k, c), dtype=np.uint8)
    coords = np.zeros((n, k, c, 2), dtype=np.float64)
    sizes = np.zeros((n, k, c, 2), dtype=np.float64)
    offset = 0
    seen = 0
    with symbols_path.open("rb") as handle:
        for raw_line in handle:
            line_offset = offset
            offset += len(raw_line)
            if not raw_line.strip():
                continue
            try:
                record = json.loads(raw_line)
                i = int(record["i"])
                if i != seen:
                    raise ValueError(f"expected record {seen}, found {i}")
                exist[i] = np.asarray(record["exist"], dtype=np.uint8).reshape(k, c)
                coords[i] = np.asarray(record["coords"], dtype=np.float64).reshape(k, c, 2)
                sizes[i] = np.asarray(record["sizes"], dtype=np.float64).reshape(k, c, 2)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError, IndexError) as exc:
                raise FormatError(f"{symbols_path}: bad record at byte offset {line_offset}: {exc}") from exc
            seen += 1
    if seen != n:
        raise FormatError(f"{symbols_path}: {seen} records, expected {n}; ends at byte offset {offset}")
    return exist, coords, sizes


def load(path: Path) -> FrameSymbolDataset:
    """
    Read a dataset directory written by :func:`save`.

    Raises:
        MissingArtifactError: if a file is absent.
        FormatError: on schema mismatch, truncation or malformed records.
    """
    manifest = _read_manifest(path)
    n, k, s, c = (int(manifest[key]) for key in ("n_samples", "frame_stack", "frame_size", "max_objects"))
    try:
        env = EnvConfig.model_validate(manifest["env"])
    except ValidationError as exc:
        raise FormatError(f"{path / MANIFEST}: invalid env config: {exc}") from exc

    train_idx = np.asarray(manifest["split"].get("train", []), dtype=np.int64)
    test_idx = np.asarray(manifest["split"].get("test", []), dtype=np.int64)
    combined = np.sort(np.concatenate([train_idx, test_idx]))
    if not np.array_equal(combined, np.arange(n)):
        raise FormatError(f"{path / MANIFEST}: split does not partition {n} samples")

    frames = _read_frames(path, (n, k, s, s))
    exist, coords, sizes = _read_symbols(path, n, k, c)
    return FrameSymbolDataset(
        env=env,
        object_names=tuple(manifest["object_names"]),
        frames=frames,
        exist=exist,
        coords=coords,
        sizes=sizes,
        train_idx=train_idx,
        test_idx=test_idx,
    )
