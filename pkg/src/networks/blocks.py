"""
Differentiable building blocks: instance normalization, AdaIN, block
partition/reassembly, Local Adaptive Fusion and Cat-Conv fusion.

The functional forms operate on ``(..., C, H, W)`` tensors and are pure; the
``nn.Module`` wrappers own the parameters.
"""

from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from src.exceptions import DivisibilityError, ShapeMismatchError, require

EPSILON = 1e-5
_VARIANCE_FLOOR = 1e-12

Grid = Union[torch.Tensor, np.ndarray]


@dataclass
class StyleStats:
    """Specific information: per-channel mean (Xi') and std (Delta')."""

    mean: torch.Tensor
    std: torch.Tensor

    def __post_init__(self):
        require(
            self.mean.shape == self.std.shape,
            f"StyleStats mean {tuple(self.mean.shape)} and std {tuple(self.std.shape)} differ",
        )

    @property
    def channels(self) -> int:
        return self.mean.shape[-1]


@dataclass
class BlockGrid:
    rows: int
    cols: int
    block_size: int
    blocks: List[Grid]

    def __len__(self) -> int:
        return len(self.blocks)


def channel_moments(x: torch.Tensor):
    """Per-channel mean and population std over the two spatial axes."""
    mean = x.mean(dim=(-2, -1), keepdim=True)
    var = (x - mean).pow(2).mean(dim=(-2, -1), keepdim=True)
    return mean, var.clamp_min(_VARIANCE_FLOOR).sqrt()


def instance_norm(x: torch.Tensor, eps: float = EPSILON) -> torch.Tensor:
    mean, std = channel_moments(x)
    return (x - mean) / (std + eps)


def adain(x: torch.Tensor, stats: StyleStats, eps: float = EPSILON) -> torch.Tensor:
    require(x.dim() >= 3, f"adain expects (..., C, H, W), got {tuple(x.shape)}")
    require(
        stats.channels == x.shape[-3],
        f"StyleStats length {stats.channels} does not match {x.shape[-3]} channels",
    )
    return stats.std[..., None, None] * instance_norm(x, eps) + stats.mean[..., None, None]


def partition_blocks(image: Grid, block_size: int) -> BlockGrid:
    """Split the last two axes into a row-major grid of square blocks."""
    height, width = image.shape[-2], image.shape[-1]
    if block_size < 1 or height % block_size or width % block_size:
        raise DivisibilityError(f"{height}x{width} is not divisible into {block_size}x{block_size} blocks")
    rows, cols = height // block_size, width // block_size
    blocks = [
        image[..., r * block_size:(r + 1) * block_size, c * block_size:(c + 1) * block_size]
        for r in range(rows)
        for c in range(cols)
    ]
    return BlockGrid(rows=rows, cols=cols, block_size=block_size, blocks=blocks)


def reassemble_blocks(grid: BlockGrid) -> Grid:
    """Inverse of partition_blocks."""
    if len(grid.blocks) != grid.rows * grid.cols or not grid.blocks:
        raise ShapeMismatchError(f"{len(grid.blocks)} blocks do not fill a {grid.rows}x{grid.cols} grid")
    shape = tuple(grid.blocks[0].shape)
    if shape[-2:] != (grid.block_size, grid.block_size):
        raise ShapeMismatchError(f"Block shape {shape} does not match block_size {grid.block_size}")
    for block in grid.blocks:
        if tuple(block.shape) != shape:
            raise ShapeMismatchError(f"Inconsistent block shapes: {tuple(block.shape)} vs {shape}")

    concat = torch.cat if isinstance(grid.blocks[0], torch.Tensor) else np.concatenate
    rows = [
        concat(grid.blocks[r * grid.cols:(r + 1) * grid.cols], -1)
        for r in range(grid.rows)
    ]
    return concat(rows, -2)


def _stack_modalities(modalities: Union[torch.Tensor, Sequence[torch.Tensor]]) -> torch.Tensor:
    if isinstance(modalities, torch.Tensor):
        return modalities
    shapes = {tuple(m.shape) for m in modalities}
    require(len(shapes) == 1, f"Modalities differ in resolution: {sorted(shapes)}")
    return torch.stack(list(modalities), dim=-3)


def laf_forward(
    modalities: Union[torch.Tensor, Sequence[torch.Tensor]],
    weight: torch.Tensor,
    bias: torch.Tensor,
    block_size: int,
) -> torch.Tensor:
    """
    Local Adaptive Fusion.

    ``modalities`` is ``(..., M, H, W)`` (or a sequence of ``(..., H, W)``
    images). Each grid cell applies its own 1x1 kernel ``weight[cell]`` (M
    weights) plus ``bias[cell]``; the result is ``(..., 1, H, W)``.
    """
    x = _stack_modalities(modalities)
    grid = partition_blocks(x, block_size)
    require(
        tuple(weight.shape) == (len(grid), x.shape[-3]),
        f"LAF weight {tuple(weight.shape)} does not match {len(grid)} cells x {x.shape[-3]} modalities",
    )
    require(tuple(bias.shape) == (len(grid),), f"LAF bias {tuple(bias.shape)} expects {len(grid)} cells")
    fused = [
        torch.einsum("...mhw,m->...hw", block, weight[cell]).unsqueeze(-3) + bias[cell]
        for cell, block in enumerate(grid.blocks)
    ]
    return reassemble_blocks(BlockGrid(grid.rows, grid.cols, block_size, fused))


def cat_conv_forward(
    features: Sequence[torch.Tensor],
    weight: torch.Tensor,
    bias: torch.Tensor = None,
) -> torch.Tensor:
    """Concatenate M feature maps along channels, then a 3x3 stride-1 convolution."""
    require(len(features) > 0, "cat_conv_forward needs at least one feature map")
    shapes = {tuple(f.shape) for f in features}
    require(len(shapes) == 1, f"Feature maps differ in shape: {sorted(shapes)}")
    stacked = torch.cat(list(features), dim=-3)
    require(
        weight.shape[1] == stacked.shape[-3],
        f"Cat-Conv kernel expects {weight.shape[1]} input channels, got {stacked.shape[-3]}",
    )
    return F.conv2d(stacked, weight, bias, stride=1, padding=1)


class InstanceNorm(nn.Module):
    def __init__(self, eps: float = EPSILON):
        super().__init__()
        self.eps = eps

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return instance_norm(x, self.eps)


class AdaptiveInstanceNorm(nn.Module):
    def __init__(self, eps: float = EPSILON):
        super().__init__()
        self.eps = eps

    def forward(self, x: torch.Tensor, stats: StyleStats) -> torch.Tensor:
        return adain(x, stats, self.eps)


def _conv3(channels: int, padding_mode: str) -> nn.Conv2d:
    return nn.Conv2d(channels, channels, kernel_size=3, stride=1, padding=1, padding_mode=padding_mode)


class ResBlock(nn.Module):
    """Padding - Conv - IN - ReLU - Padding - Conv - IN, plus identity skip."""

    def __init__(self, channels: int, padding_mode: str = "zeros", eps: float = EPSILON):
        super().__init__()
        self.body = nn.Sequential(
            _conv3(channels, padding_mode),
            InstanceNorm(eps),
            nn.ReLU(inplace=False),
            _conv3(channels, padding_mode),
            InstanceNorm(eps),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


class AdaINResBlock(nn.Module):
    """ResBlock whose IN layers take their affine parameters from StyleStats."""

    def __init__(self, channels: int, padding_mode: str = "zeros", eps: float = EPSILON):
        super().__init__()
        self.conv1 = _conv3(channels, padding_mode)
        self.norm1 = AdaptiveInstanceNorm(eps)
        self.conv2 = _conv3(channels, padding_mode)
        self.norm2 = AdaptiveInstanceNorm(eps)

    def forward(self, x: torch.Tensor, first: StyleStats, second: StyleStats) -> torch.Tensor:
        out = F.relu(self.norm1(self.conv1(x), first))
        out = self.norm2(self.conv2(out), second)
        return x + out


class LocalAdaptiveFusion(nn.Module):
    """Block-wise 1x1 convolution producing the pseudo-target (F)."""

    def __init__(self, modality_count: int, image_size: int, block_size: int):
        super().__init__()
        if image_size % block_size:
            raise DivisibilityError(f"image_size {image_size} is not divisible by block_size {block_size}")
        self.modality_count = modality_count
        self.block_size = block_size
        self.cells = (image_size // block_size) ** 2
        self.weight = nn.Parameter(torch.full((self.cells, modality_count), 1.0 / modality_count))
        self.bias = nn.Parameter(torch.zeros(self.cells))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return laf_forward(x, self.weight, self.bias, self.block_size)

    def extra_repr(self) -> str:
        return f"modalities={self.modality_count}, block_size={self.block_size}, cells={self.cells}"


class CatConvFusion(nn.Module):
    def __init__(self, feature_channels: int, modality_count: int):
        super().__init__()
        self.modality_count = modality_count
        self.conv = nn.Conv2d(feature_channels * modality_count, feature_channels, kernel_size=3, stride=1, padding=1)

    def forward(self, features: Sequence[torch.Tensor]) -> torch.Tensor:
        require(
            len(features) == self.modality_count,
            f"Cat-Conv built for {self.modality_count} feature maps, got {len(features)}",
        )
        return cat_conv_forward(features, self.conv.weight, self.conv.bias)
