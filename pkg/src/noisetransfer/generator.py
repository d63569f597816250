"""Conditional generator that rewrites the noise in an image.

Two streams.  The image-encoding stream is a chain of noise transfer blocks
(spatial attention, channel attention, residual convolutions) that separates
content from corruption.  The noise-level-encoding stream digests the target
noise level map at reduced resolution and, in train mode, multiplies its
features elementwise by fresh standard Gaussians so the same map can describe
many noise realisations.  The streams are fused by concatenation and a small
reconstruction head whose output is added to the input image, so the network
predicts a residual.  With an all-zero target map the residual is the negated
noise: blind denoising.

Every convolution is 3x3, stride 1, padding 1, except the two attention
projections which are 1x1.  The last convolution of every enclosed stack has
no activation.
"""

import math
from dataclasses import dataclass, asdict

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .noise_model import as_generator

_MODES = ("train", "inference")


@dataclass
class GeneratorConfig:
    in_channels: int = 1
    channels: int = 64
    num_ntb: int = 4
    rb_per_ntb: int = 4
    ca_bottleneck: int = 4
    noise_branch_pools: int = 2
    long_skip_noise_branch: bool = False
    use_noise_branch: bool = True
    use_sa: bool = True
    use_ca: bool = True
    use_ror: bool = True

    def __post_init__(self):
        if self.in_channels not in (1, 3):
            raise ValueError("in_channels must be 1 or 3")
        for field in ("channels", "num_ntb", "rb_per_ntb", "ca_bottleneck",
                      "noise_branch_pools"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be at least 1")
        if self.ca_bottleneck > self.channels:
            raise ValueError("ca_bottleneck cannot exceed channels")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(**d)


def _conv(cin, cout, kernel=3):
    return nn.Conv2d(cin, cout, kernel, stride=1, padding=kernel // 2)


class ResidualBlock(nn.Module):
    """x + Conv(PReLU(Conv(x))), channel-preserving."""

    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = _conv(channels, channels)
        self.act = nn.PReLU(channels)
        self.conv2 = _conv(channels, channels)

    def forward(self, x):
        return x + self.conv2(self.act(self.conv1(x)))


class SpatialAttention(nn.Module):
    """Rescale features by a per-pixel gate built from channel statistics."""

    def __init__(self):
        super().__init__()
        self.proj = nn.Conv2d(2, 1, kernel_size=1)

    def heat_map(self, x):
        stats = torch.cat([x.mean(dim=1, keepdim=True),
                           x.amax(dim=1, keepdim=True)], dim=1)
        return torch.sigmoid(self.proj(stats))

    def forward(self, x):
        return x * self.heat_map(x)


class ChannelAttention(nn.Module):
    """Rescale channels by a gate built from globally pooled features."""

    def __init__(self, channels: int, bottleneck: int):
        super().__init__()
        self.reduce = nn.Conv2d(channels, bottleneck, kernel_size=1)
        self.act = nn.PReLU(bottleneck)
        self.expand = nn.Conv2d(bottleneck, channels, kernel_size=1)

    def heat_vector(self, x):
        pooled = x.mean(dim=(2, 3), keepdim=True)
        return torch.sigmoid(self.expand(self.act(self.reduce(pooled))))

    def forward(self, x):
        return x * self.heat_vector(x)


class NoiseTransferBlock(nn.Module):
    """Attention-guided residual group: f + Conv(RBs(CA(SA(f)))).

    The trailing convolution closes the group so that a zero-parameter body
    contributes nothing and the block starts as an identity.  The outer skip
    is dropped when use_ror is false (attention and RBs still run).
    """

    def __init__(self, channels: int, rb_count: int, ca_bottleneck: int,
                 use_sa: bool = True, use_ca: bool = True, use_ror: bool = True):
        super().__init__()
        self.sa = SpatialAttention() if use_sa else None
        self.ca = ChannelAttention(channels, ca_bottleneck) if use_ca else None
        self.blocks = nn.ModuleList(ResidualBlock(channels) for _ in range(rb_count))
        self.tail = _conv(channels, channels)
        self.use_ror = use_ror

    def forward(self, x):
        h = x
        if self.sa is not None:
            h = self.sa(h)
        if self.ca is not None:
            h = self.ca(h)
        for block in self.blocks:
            h = block(h)
        h = self.tail(h)
        return x + h if self.use_ror else h


def randomization_block(features, mode: str, rng=None):
    """Train mode: multiply elementwise by fresh N(0, 1) draws; else identity.

    The draws come from the supplied numpy generator, so a fixed seed gives a
    fixed mask and a reused generator gives fresh masks per call.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    if mode == "inference":
        return features
    if rng is None:
        raise ValueError("train mode needs an rng for the randomization block")
    r = as_generator(rng).standard_normal(tuple(features.shape))
    return features * torch.from_numpy(r).to(features.dtype)


class NoiseLevelEncoder(nn.Module):
    """Digest the target noise level map into feature space.

    Convolutions with two average-pooled reductions, the randomization block,
    nearest-neighbour upsampling back to full resolution, and a tail
    convolution.  An optional long skip adds the entry features to the output;
    training switches it on only for the last stretch of iterations.
    """

    def __init__(self, channels: int, pools: int):
        super().__init__()
        self.head = _conv(1, channels)
        self.head_act = nn.PReLU(channels)
        self.stages = nn.ModuleList(
            nn.Sequential(_conv(channels, channels), nn.PReLU(channels))
            for _ in range(pools)
        )
        self.tail = _conv(channels, channels)

    def forward(self, level_map, mode: str, rng=None, long_skip: bool = False):
        entry = self.head_act(self.head(level_map))
        h = entry
        for stage in self.stages:
            h = F.avg_pool2d(h, 2, ceil_mode=True)
            h = stage(h)
        h = randomization_block(h, mode, rng)
        h = F.interpolate(h, size=level_map.shape[-2:], mode="nearest")
        out = self.tail(h)
        if long_skip:
            out = out + entry
        return out


class NoiseTransferGenerator(nn.Module):
    """Full two-stream generator; see the module docstring."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        c = config.channels
        self.head = _conv(config.in_channels, c)
        self.head_act = nn.PReLU(c)
        self.ntbs = nn.ModuleList(
            NoiseTransferBlock(c, config.rb_per_ntb, config.ca_bottleneck,
                               use_sa=config.use_sa, use_ca=config.use_ca,
                               use_ror=config.use_ror)
            for _ in range(config.num_ntb)
        )
        self.stream_tail = _conv(c, c)
        if config.use_noise_branch:
            self.noise_branch = NoiseLevelEncoder(c, config.noise_branch_pools)
            fused = 2 * c
        else:
            self.noise_branch = None
            fused = c
        self.fuse = _conv(fused, c)
        self.fuse_act = nn.PReLU(c)
        self.out_conv = _conv(c, config.in_channels)
        # Runtime toggle for the noise-branch long skip; the training schedule
        # flips it near the end of the run.
        self.long_skip_active = config.long_skip_noise_branch

    def forward(self, image, level_map=None, *, mode: str = "inference", rng=None):
        if mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if image.ndim != 4 or image.shape[1] != self.config.in_channels:
            raise ValueError("image must be (N, C, H, W) with C matching the config")
        f = self.head_act(self.head(image))
        h = f
        for ntb in self.ntbs:
            h = ntb(h)
        h = self.stream_tail(h)
        if self.config.use_ror:
            h = f + h

        if self.noise_branch is not None:
            if level_map is None:
                raise ValueError("this generator conditions on a noise level map")
            if (level_map.ndim != 4 or level_map.shape[1] != 1
                    or level_map.shape[-2:] != image.shape[-2:]
                    or level_map.shape[0] != image.shape[0]):
                raise ValueError("level map must be (N, 1, H, W) aligned with the image")
            b = self.noise_branch(level_map, mode, rng, self.long_skip_active)
            h = torch.cat([h, b], dim=1)

        delta = self.out_conv(self.fuse_act(self.fuse(h)))
        return image + delta if self.config.use_ror else delta


def init_parameters(module: nn.Module, seed) -> None:
    """Deterministic init: He fan-in Gaussians for conv weights (from numpy,
    so it is independent of torch's global RNG), zero biases, 0.25 slopes."""
    rng = as_generator(seed)
    with torch.no_grad():
        for name, p in module.named_parameters():
            if name.endswith("bias"):
                p.zero_()
            elif p.ndim == 4:
                fan_in = p.shape[1] * p.shape[2] * p.shape[3]
                w = rng.standard_normal(tuple(p.shape)) * math.sqrt(2.0 / fan_in)
                p.copy_(torch.from_numpy(w).to(p.dtype))
            else:
                p.fill_(0.25)


def build_generator(config: GeneratorConfig, seed,
                    zero_reconstruction_head: bool = True) -> NoiseTransferGenerator:
    """Construct and initialise a generator.

    By default the final reconstruction convolution is zeroed, so a fresh
    generator is exactly the identity mapping and training starts from a
    do-nothing denoiser.
    """
    gen = NoiseTransferGenerator(config)
    init_parameters(gen, seed)
    if zero_reconstruction_head:
        with torch.no_grad():
            gen.out_conv.weight.zero_()
            gen.out_conv.bias.zero_()
    return gen
