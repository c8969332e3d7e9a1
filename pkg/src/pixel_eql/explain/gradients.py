# pixel_eql/explain/gradients.py
from __future__ import annotations

import copy
import logging
from typing import Sequence

import numpy as np
import torch

from pixel_eql.core.tensor import check_finite
from pixel_eql.eql.network import EQLNetwork
from pixel_eql.errors import ContractError, DimensionError
from pixel_eql.explain.grounding import DecisionContext, VariableReading

logger = logging.getLogger(__name__)


def grad_loglik(eql: EQLNetwork, coords: np.ndarray | torch.Tensor, action: int) -> np.ndarray:
    """
    ``d ln pi_EQL(action | coords) / d coords`` in double precision.

    ``coords`` is the masked coordinate vector the EQL actor actually reads.

    Raises:
        ContractError: for an invalid action.
        NumericError: if the gradient is not finite.
    """
    if not 0 <= int(action) < eql.n_actions:
        raise ContractError(f"Action {action} out of range")
    net = copy.deepcopy(eql).double()
    x = torch.as_tensor(np.asarray(coords, dtype=np.float64)).reshape(-1).clone().requires_grad_(True)
    if x.numel() != net.input_dim:
        raise DimensionError(f"{x.numel()} coordinates for {net.input_dim} EQL inputs")
    log_prob = net(x[None]).log_probs[0, int(action)]
    (grad,) = torch.autograd.grad(log_prob, x)
    return check_finite(grad, f"log-likelihood gradient for action {action}").numpy()


def decision_context(
    eql: EQLNetwork,
    coords: np.ndarray | torch.Tensor,
    action: int,
    variable_names: Sequence[str],
    action_names: Sequence[str],
) -> DecisionContext:
    """Values and gradients of every input variable behind one decision."""
    values = np.asarray(coords, dtype=np.float64).reshape(-1)
    if len(variable_names) != values.size:
        raise DimensionError(f"{len(variable_names)} names for {values.size} coordinates")
    grads = grad_loglik(eql, values, action)
    return DecisionContext(
        action=action_names[int(action)],
        readings=[
            VariableReading(name=name, value=float(v), gradient=float(g))
            for name, v, g in zip(variable_names, values, grads)
        ],
    )
