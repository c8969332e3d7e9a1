# pixel_eql/checkpoints.py
"""
Tensor checkpoint files.

Layout::

    b"PXEQ" | uint32 LE header length | JSON header | tensor bytes

The header names the schema (``pcp-v1`` for perception, ``agt-v1`` for a
trained agent), free-form metadata, and for each tensor its name, dtype,
shape and byte offset into the data section. Tensors are little-endian.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import torch
from pydantic import ValidationError

from pixel_eql.config import PerceptionConfig
from pixel_eql.errors import FormatError, MissingArtifactError
from pixel_eql.perception.network import PerceptionNet

logger = logging.getLogger(__name__)

MAGIC = b"PXEQ"
PERCEPTION_SCHEMA = "pcp-v1"
AGENT_SCHEMA = "agt-v1"

_DTYPES = {
    "float32": np.dtype("<f4"),
    "float64": np.dtype("<f8"),
    "int64": np.dtype("<i8"),
    "uint8": np.dtype("u1"),
    "bool": np.dtype("?"),
}


def save_state(
    path: Path,
    schema: str,
    state: Mapping[str, torch.Tensor],
    metadata: Mapping[str, Any],
) -> Path:
    entries = []
    chunks = []
    offset = 0
    for name in sorted(state):
        array = state[name].detach().cpu().numpy()
        dtype_name = str(array.dtype)
        if dtype_name not in _DTYPES:
            raise FormatError(f"Cannot store tensor {name} of dtype {dtype_name}")
        data = np.ascontiguousarray(array, dtype=_DTYPES[dtype_name]).tobytes()
        entries.append(
            {"name": name, "dtype": dtype_name, "shape": list(array.shape), "offset": offset, "nbytes": len(data)}
        )
        chunks.append(data)
        offset += len(data)
    header = json.dumps(
        {"schema": schema, "metadata": metadata, "tensors": entries}, sort_keys=True
    ).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", len(header)))
        handle.write(header)
        for chunk in chunks:
            handle.write(chunk)
    logger.debug("Wrote %s (%s tensors, %s bytes)", path, len(entries), offset)
    return path


def load_state(path: Path, schema: str, producer: str) -> tuple[dict[str, torch.Tensor], dict[str, Any]]:
    """
    Raises:
        MissingArtifactError: if ``path`` does not exist.
        FormatError: on a bad magic, a schema mismatch or truncation.
    """
    if not path.is_file():
        raise MissingArtifactError(path, producer)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a checkpoint file")
    if len(raw) < 8:
        raise FormatError(f"{path}: truncated at byte offset {len(raw)}")
    (header_len,) = struct.unpack("<I", raw[4:8])
    start = 8 + header_len
    if len(raw) < start:
        raise FormatError(f"{path}: header truncated at byte offset {len(raw)}")
    try:
        header = json.loads(raw[8:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    if header.get("schema") != schema:
        raise FormatError(f"{path}: expected schema {schema}, found {header.get('schema')!r}")

    state: dict[str, torch.Tensor] = {}
    for entry in header["tensors"]:
        begin = start + int(entry["offset"])
        end = begin + int(entry["nbytes"])
        if end > len(raw):
            raise FormatError(f"{path}: tensor {entry['name']} truncated at byte offset {len(raw)}")
        array = np.frombuffer(raw[begin:end], dtype=_DTYPES[entry["dtype"]]).reshape(entry["shape"])
        state[entry["name"]] = torch.from_numpy(array.astype(array.dtype.newbyteorder("=")))
    return state, header.get("metadata", {})


# ---------------- perception ----------------


def perception_metadata(net: PerceptionNet, object_names: tuple[str, ...], env_id: str) -> dict[str, Any]:
    return {
        "config": net.config.model_dump(mode="json"),
        "frame_size": net.frame_size,
        "frame_stack": net.frame_stack,
        "max_objects": net.max_objects,
        "object_names": list(object_names),
        "env_id": env_id,
    }


def build_perception(metadata: Mapping[str, Any]) -> PerceptionNet:
    try:
        config = PerceptionConfig.model_validate(metadata["config"])
        return PerceptionNet(
            config,
            frame_size=int(metadata["frame_size"]),
            frame_stack=int(metadata["frame_stack"]),
            max_objects=int(metadata["max_objects"]),
        )
    except (KeyError, ValidationError) as exc:
        raise FormatError(f"Checkpoint metadata does not describe a perception network: {exc}") from exc


def save_perception(
    path: Path, net: PerceptionNet, object_names: tuple[str, ...], env_id: str
) -> Path:
    return save_state(
        path, PERCEPTION_SCHEMA, net.state_dict(), perception_metadata(net, object_names, env_id)
    )


def load_perception(path: Path) -> tuple[PerceptionNet, dict[str, Any]]:
    state, metadata = load_state(path, PERCEPTION_SCHEMA, "pretrain")
    net = build_perception(metadata)
    dtype = next(iter(state.values())).dtype if state else torch.float32
    net.to(dtype)
    net.load_state_dict(state)
    return net, metadata
