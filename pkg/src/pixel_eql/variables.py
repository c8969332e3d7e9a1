# pixel_eql/variables.py
"""
Names of the symbolic policy inputs.

The perception network emits coordinates shaped ``[K, C, 2]``; flattened in
that order, entry ``(k, j, axis)`` is called ``{axis}_{object}_{k+1}``, e.g.
``y_ball_4`` is the ball's y coordinate in the newest of four frames.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from pixel_eql.errors import ContractError

AXES = ("x", "y")
_NAME = re.compile(r"^(?P<axis>[xy])_(?P<obj>.+)_(?P<frame>\d+)$")


@dataclass(frozen=True)
class Variable:
    name: str
    axis: str
    object_index: int
    object_name: str
    frame: int  # 1-based, oldest first


def variable_table(object_names: Sequence[str], frame_stack: int) -> list[Variable]:
    table = []
    for k in range(frame_stack):
        for j, obj in enumerate(object_names):
            for axis in AXES:
                table.append(Variable(f"{axis}_{obj}_{k + 1}", axis, j, obj, k + 1))
    return table


def variable_names(object_names: Sequence[str], frame_stack: int) -> list[str]:
    return [v.name for v in variable_table(object_names, frame_stack)]


def objects_of(names: Iterable[str], object_names: Sequence[str]) -> set[int]:
    """Object slots referenced by the given variable names."""
    index = {name: j for j, name in enumerate(object_names)}
    found = set()
    for name in names:
        match = _NAME.match(name)
        if not match or match["obj"] not in index:
            raise ContractError(f"Not a coordinate variable: {name}")
        found.add(index[match["obj"]])
    return found
