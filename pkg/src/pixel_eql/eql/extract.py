# pixel_eql/eql/extract.py
"""Turn a (pruned) EQL network into one polynomial per output logit."""

from __future__ import annotations

import logging
from typing import Sequence

import torch

from pixel_eql.eql.expr import SymbolicExpr
from pixel_eql.eql.network import BINARY, UNARY, EQLNetwork
from pixel_eql.errors import DimensionError, ExtractionError

logger = logging.getLogger(__name__)


def _apply_unit(name: str, args: list[SymbolicExpr]) -> SymbolicExpr:
    if name == "square":
        return args[0] * args[0]
    if name == "cube":
        return args[0] * args[0] * args[0]
    if name in ("constant", "identity"):
        return args[0]
    if name == "multiply":
        return args[0] * args[1]
    if name == "add":
        return args[0] + args[1]
    raise ExtractionError(f"No symbolic form for activation {name!r}")


def extract(
    net: EQLNetwork,
    variable_names: Sequence[str],
    action_names: Sequence[str],
) -> dict[str, SymbolicExpr]:
    """
    Symbolic form of every logit of ``net``, keyed ``logits_{action}{g}``.

    Weights are read in double precision and zero weights contribute no term,
    so a pruned network yields sparse polynomials.

    Raises:
        DimensionError: if the number of names does not match the input width.
        ExtractionError: for an activation without a symbolic form.
    """
    if len(variable_names) != net.input_dim:
        raise DimensionError(
            f"{len(variable_names)} variable names for {net.input_dim} EQL inputs"
        )
    for name, _ in net.layout.unary + net.layout.binary:
        if name not in UNARY and name not in BINARY:
            raise ExtractionError(f"No symbolic form for activation {name!r}")

    h = [SymbolicExpr.variable(v) for v in variable_names]
    with torch.no_grad():
        for depth, layer in enumerate(net.layers, start=1):
            W = layer.weight.detach().double().tolist()
            b = layer.bias.detach().double().tolist()
            pre = [SymbolicExpr.affine(row, h, bias) for row, bias in zip(W, b)]
            h = [_apply_unit(name, [pre[i] for i in idx]) for name, idx in layer.layout.units()]
            logger.debug(
                "layer %s: %s units, %s terms", depth, len(h), sum(len(e.terms) for e in h)
            )
        W = net.output.weight.detach().double().tolist()
        b = net.output.bias.detach().double().tolist()
    t = float(net.temperature)
    names = net.logit_names(action_names)
    return {
        name: SymbolicExpr.affine(row, h, bias).scale(t)
        for name, row, bias in zip(names, W, b)
    }


def relevant_variables(policy: dict[str, SymbolicExpr]) -> set[str]:
    """Variables that appear with a nonzero coefficient in any logit."""
    found: set[str] = set()
    for expr in policy.values():
        found |= expr.variables()
    return found
