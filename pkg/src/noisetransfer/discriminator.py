"""Conditional patch discriminator.

Scores overlapping patches rather than whole images: a stack of stride-2 then
stride-1 4x4 convolutions with LeakyReLU(0.2) and no normalisation, ending in
a one-channel logit map.  The target noise level map is concatenated to the
image as an extra input plane, so "real" means "plausible under this level
map", not just "plausible".
"""

from dataclasses import dataclass, asdict

import torch
from torch import nn

from .generator import init_parameters


@dataclass
class DiscriminatorConfig:
    in_channels: int = 1
    layers: int = 4
    base_channels: int = 64
    kernel_size: int = 4

    def __post_init__(self):
        if self.layers < 2:
            raise ValueError("need at least two layers")
        if self.base_channels < 1:
            raise ValueError("base_channels must be at least 1")
        if self.kernel_size < 1:
            raise ValueError("kernel_size must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorConfig":
        return cls(**d)


def layer_geometry(config: DiscriminatorConfig):
    """(in_channels, out_channels, stride) per convolution, conditioning included.

    All layers before the last two use stride 2; channel width doubles per
    layer, capped at 8x base; the final layer projects to one logit channel.
    """
    geometry = []
    cin = config.in_channels + 1
    for i in range(config.layers):
        last = i == config.layers - 1
        cout = 1 if last else min(config.base_channels * 2 ** i,
                                  config.base_channels * 8)
        stride = 1 if i >= config.layers - 2 else 2
        geometry.append((cin, cout, stride))
        cin = cout
    return geometry


def logit_map_size(config: DiscriminatorConfig, height: int, width: int):
    """Spatial size of the output logit map for a given input size."""
    k = config.kernel_size
    pad = k // 2 - 1 if k % 2 == 0 else k // 2
    for _, _, stride in layer_geometry(config):
        height = (height + 2 * pad - k) // stride + 1
        width = (width + 2 * pad - k) // stride + 1
        if height < 1 or width < 1:
            raise ValueError("input too small for this discriminator")
    return height, width


def receptive_field(config: DiscriminatorConfig):
    """(extent, jump) of one output logit in input pixels, ignoring padding."""
    extent, jump = 1, 1
    for _, _, stride in layer_geometry(config):
        extent += (config.kernel_size - 1) * jump
        jump *= stride
    return extent, jump


class PatchDiscriminator(nn.Module):
    def __init__(self, config: DiscriminatorConfig):
        super().__init__()
        self.config = config
        k = config.kernel_size
        pad = k // 2 - 1 if k % 2 == 0 else k // 2
        convs = []
        for cin, cout, stride in layer_geometry(config):
            convs.append(nn.Conv2d(cin, cout, k, stride=stride, padding=pad))
        self.convs = nn.ModuleList(convs)
        self.act = nn.LeakyReLU(0.2)

    def forward(self, level_map, image):
        if image.ndim != 4 or image.shape[1] != self.config.in_channels:
            raise ValueError("image must be (N, C, H, W) with C matching the config")
        if (level_map.ndim != 4 or level_map.shape[1] != 1
                or level_map.shape[-2:] != image.shape[-2:]
                or level_map.shape[0] != image.shape[0]):
            raise ValueError("level map must be (N, 1, H, W) aligned with the image")
        h = torch.cat([level_map, image], dim=1)
        for i, conv in enumerate(self.convs):
            h = conv(h)
            if i < len(self.convs) - 1:
                h = self.act(h)
        return h


def build_discriminator(config: DiscriminatorConfig, seed) -> PatchDiscriminator:
    disc = PatchDiscriminator(config)
    init_parameters(disc, seed)
    return disc
