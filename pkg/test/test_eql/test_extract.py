from __future__ import annotations

import numpy as np
import pytest
import torch

from pixel_eql.config import EQLConfig
from pixel_eql.eql import EQLNetwork, SymbolicExpr, extract, prune, relevant_variables, to_string
from pixel_eql.errors import DimensionError

D = torch.float64


def zeroed(net: EQLNetwork) -> EQLNetwork:
    with torch.no_grad():
        for p in net.parameters():
            p.zero_()
    return net


def test_square_path_extracts_to_a_single_term():
    net = zeroed(EQLNetwork(EQLConfig(repetitions=1), input_dim=1, n_actions=1).to(D))
    with torch.no_grad():
        net.layers[0].linear.weight[0, 0] = 1.0  # square unit reads x_0
        net.output.weight[0, 0] = 0.05
    policy = extract(net, ["x_0"], ["a"])
    assert policy["logits_a1"] == SymbolicExpr({(("x_0", 2),): 0.5})
    assert to_string(policy["logits_a1"]) == "0.5*x_0**2"
    assert policy["logits_a2"].terms == {}


def test_zero_network_with_constant_unit_bias_is_constant():
    net = zeroed(EQLNetwork(EQLConfig(repetitions=1), input_dim=2, n_actions=1).to(D))
    constant_row = net.layout.constant_rows()[0]
    with torch.no_grad():
        net.layers[0].linear.bias[constant_row] = 0.3
        net.output.weight[0, constant_row] = 1.0
    policy = extract(net, ["x_0", "y_0"], ["a"])
    assert policy["logits_a1"].terms == {(): pytest.approx(3.0)}
    assert relevant_variables(policy) == set()


def test_wrong_number_of_names_is_a_dimension_error():
    net = EQLNetwork(EQLConfig(), input_dim=2, n_actions=1)
    with pytest.raises(DimensionError):
        extract(net, ["x_0"], ["a"])


def test_extraction_matches_forward_pass_on_random_networks():
    rng = np.random.default_rng(0)
    names = ["x_0", "y_0", "x_1", "y_1"]
    for seed in range(50):
        torch.manual_seed(seed)
        config = EQLConfig(repetitions=int(rng.integers(1, 4)), hidden_layers=1 + seed % 2)
        net = EQLNetwork(config, input_dim=4, n_actions=3).to(D)
        if seed % 3 == 0:
            net = prune(net, threshold=0.1)
        x = rng.uniform(0.0, 1.0, size=(1000, 4))
        with torch.no_grad():
            logits = net(torch.as_tensor(x)).logits.numpy()
        policy = extract(net, names, ["a", "b", "c"])
        values = {name: x[:, j] for j, name in enumerate(names)}
        for col, expr in enumerate(policy.values()):
            got = np.broadcast_to(expr.evaluate(values), (1000,))
            np.testing.assert_allclose(got, logits[:, col], rtol=1e-9, atol=1e-9)


def test_pruned_weights_contribute_no_variables():
    net = zeroed(EQLNetwork(EQLConfig(repetitions=1), input_dim=3, n_actions=1).to(D))
    identity_row = 6 - 3  # square, cube, constant precede identity
    with torch.no_grad():
        net.layers[0].linear.weight[identity_row] = torch.tensor([0.5, 0.005, 0.0], dtype=D)
        net.output.weight[0, identity_row] = 1.0
    assert relevant_variables(extract(net, ["a", "b", "c"], ["go"])) == {"a", "b"}
    assert relevant_variables(extract(prune(net, 0.01), ["a", "b", "c"], ["go"])) == {"a"}
