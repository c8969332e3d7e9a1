from __future__ import annotations

import pytest
import torch

from pixel_eql.config import PerceptionConfig
from pixel_eql.perception import PerceptionNet
from pixel_eql.errors import DimensionError


def make_net(config, dtype=torch.float64) -> PerceptionNet:
    torch.manual_seed(0)
    return PerceptionNet(config, frame_size=16, frame_stack=2, max_objects=3).to(dtype)


def test_output_shapes(tiny_perception_config):
    net = make_net(tiny_perception_config)
    out = net(torch.rand(5, 2, 16, 16, dtype=torch.float64))
    assert out.hidden.shape == (5, 16)
    assert out.exist_prob.shape == (5, 2, 3)
    assert out.coords_raw.shape == (5, 2, 3, 2)
    assert out.sizes_raw.shape == (5, 3, 2)
    assert out.masked_coords().shape == (5, 12)
    assert net.n_variables == 12


def test_trunk_chains_conv_channels():
    net = PerceptionNet(PerceptionConfig(), frame_size=32, frame_stack=4, max_objects=8)
    convs = [m for m in net.trunk if isinstance(m, torch.nn.Conv2d)]
    assert [(c.in_channels, c.out_channels) for c in convs] == [(4, 16), (16, 32), (32, 32)]


def test_zero_network_gives_half_probability_and_zero_coordinates(tiny_perception_config):
    net = make_net(tiny_perception_config)
    with torch.no_grad():
        for p in net.parameters():
            p.zero_()
    out = net(torch.zeros(1, 2, 16, 16, dtype=torch.float64))
    assert torch.all(out.exist_prob == 0.5)
    assert torch.all(out.coords == 0.0)


def test_forward_is_deterministic(tiny_perception_config):
    net = make_net(tiny_perception_config)
    frames = torch.rand(3, 2, 16, 16, dtype=torch.float64)
    a, b = net(frames), net(frames)
    assert torch.equal(a.coords_raw, b.coords_raw)
    assert torch.equal(a.exist_prob, b.exist_prob)


def test_exported_coordinates_are_clipped(tiny_perception_config):
    net = make_net(tiny_perception_config)
    with torch.no_grad():
        net.coord_head[2].bias.fill_(3.0)
        net.size_head[2].bias.fill_(-3.0)
    out = net(torch.rand(4, 2, 16, 16, dtype=torch.float64))
    assert out.coords.min() >= 0.0 and out.coords.max() <= 1.0
    assert out.sizes.min() >= 0.0 and out.sizes.max() <= 1.0


def test_masked_coordinates_zero_absent_objects(tiny_perception_config):
    net = make_net(tiny_perception_config)
    with torch.no_grad():
        net.exist_head[2].weight.zero_()
        net.exist_head[2].bias.copy_(torch.tensor([5.0, -5.0, 5.0, 5.0, -5.0, 5.0]))
        net.coord_head[2].weight.zero_()
        net.coord_head[2].bias.fill_(0.5)
    masked = net(torch.rand(1, 2, 16, 16, dtype=torch.float64)).masked_coords(0.5)
    # Object 1 is absent in both frames: its x and y in each frame are zero.
    assert masked[0].tolist() == [0.5, 0.5, 0.0, 0.0, 0.5, 0.5] * 2


@pytest.mark.parametrize("shape", [(2, 16, 16), (1, 3, 16, 16), (1, 2, 8, 8)])
def test_wrong_frame_shape_is_a_dimension_error(tiny_perception_config, shape):
    net = make_net(tiny_perception_config)
    with pytest.raises(DimensionError):
        net(torch.zeros(shape, dtype=torch.float64))
