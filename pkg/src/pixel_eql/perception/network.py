# pixel_eql/perception/network.py
"""
Convolutional perception network.

A convolutional trunk turns a stack of ``K`` frames into a hidden vector; three
heads read that vector:

- existence: ``C*K`` sigmoid probabilities, one per object per frame,
- coordinates: ``2*C*K`` centres, clipped to [0, 1] on export,
- shape: ``2*C`` sizes for the newest frame.

The hidden vector also feeds the neural actor and the critic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch import nn

from pixel_eql.config import PerceptionConfig
from pixel_eql.core.tensor import clip01
from pixel_eql.errors import DimensionError

logger = logging.getLogger(__name__)

_ACTIVATIONS: dict[str, type[nn.Module]] = {"relu": nn.ReLU, "tanh": nn.Tanh}


@dataclass
class PerceptionOutput:
    hidden: torch.Tensor  # [B, H]
    exist_logits: torch.Tensor  # [B, K, C]
    exist_prob: torch.Tensor  # [B, K, C]
    coords_raw: torch.Tensor  # [B, K, C, 2]
    sizes_raw: torch.Tensor  # [B, C, 2]

    @property
    def coords(self) -> torch.Tensor:
        return clip01(self.coords_raw)

    @property
    def sizes(self) -> torch.Tensor:
        return clip01(self.sizes_raw)

    def masked_coords(self, threshold: float = 0.5) -> torch.Tensor:
        """
        Flattened ``[B, 2*C*K]`` policy input: clipped coordinates, zeroed where
        the object's existence probability is below ``threshold``.
        """
        present = (self.exist_prob >= threshold).to(self.coords_raw.dtype).unsqueeze(-1)
        masked = self.coords * present
        return masked.reshape(masked.shape[0], -1)


def _head(in_dim: int, hidden: int, out_dim: int, activation: str) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, hidden), _ACTIVATIONS[activation](), nn.Linear(hidden, out_dim)
    )


class PerceptionNet(nn.Module):
    def __init__(
        self,
        config: PerceptionConfig,
        frame_size: int,
        frame_stack: int,
        max_objects: int,
    ) -> None:
        super().__init__()
        self.config = config
        self.frame_size = frame_size
        self.frame_stack = frame_stack
        self.max_objects = max_objects
        act = _ACTIVATIONS[config.activation]

        layers: list[nn.Module] = []
        channels = frame_stack
        for conv in config.conv:
            layers += [
                nn.Conv2d(channels, conv.channels, conv.kernel, conv.stride, conv.padding),
                act(),
            ]
            channels = conv.channels
        self.trunk = nn.Sequential(*layers, nn.Flatten())
        with torch.no_grad():
            flat = self.trunk(torch.zeros(1, frame_stack, frame_size, frame_size)).shape[1]
        self.embed = nn.Sequential(
            nn.Linear(flat, config.hidden_dim), act(), nn.LayerNorm(config.hidden_dim)
        )

        k, c, h = frame_stack, max_objects, config.hidden_dim
        self.exist_head = _head(h, config.head_hidden, c * k, config.activation)
        self.coord_head = _head(h, config.head_hidden, 2 * c * k, config.activation)
        self.size_head = _head(h, config.head_hidden, 2 * c, config.activation)

    @property
    def hidden_dim(self) -> int:
        return self.config.hidden_dim

    @property
    def n_variables(self) -> int:
        return 2 * self.max_objects * self.frame_stack

    def forward(self, frames: torch.Tensor) -> PerceptionOutput:
        """
        Args:
            frames: ``[B, K, S, S]`` intensities in [0, 1].

        Raises:
            DimensionError: on a frame stack of the wrong shape.
        """
        expected = (self.frame_stack, self.frame_size, self.frame_size)
        if frames.dim() != 4 or tuple(frames.shape[1:]) != expected:
            raise DimensionError(
                f"perception expects [B, {expected[0]}, {expected[1]}, {expected[2]}], "
                f"got {tuple(frames.shape)}"
            )
        frames = frames.to(self.embed[0].weight.dtype)
        hidden = self.embed(self.trunk(frames))
        b, k, c = frames.shape[0], self.frame_stack, self.max_objects
        exist_logits = self.exist_head(hidden).reshape(b, k, c)
        return PerceptionOutput(
            hidden=hidden,
            exist_logits=exist_logits,
            exist_prob=torch.sigmoid(exist_logits),
            coords_raw=self.coord_head(hidden).reshape(b, k, c, 2),
            sizes_raw=self.size_head(hidden).reshape(b, c, 2),
        )
