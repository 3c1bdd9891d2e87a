from typing import List

import torch
from torch import nn

from src.exceptions import require
from src.networks.blocks import InstanceNorm, ResBlock, StyleStats
from src.networks.config import GeneratorConfig


def _check_slice(x: torch.Tensor, image_size: int, name: str) -> None:
    require(
        x.dim() == 4 and x.shape[1] == 1 and x.shape[-2:] == (image_size, image_size),
        f"{name} expects (N, 1, {image_size}, {image_size}), got {tuple(x.shape)}",
    )


class SharedEncoder(nn.Module):
    """
    SRE: extracts modality-invariant features from one source slice.

    7x7 conv, two 4x4 stride-2 down-sampling convs, then residual blocks; every
    conv is followed by instance normalization and ReLU. Output is
    ``feature_width x S/4 x S/4``.
    """

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.image_size = config.image_size
        base, feature = config.base_width, config.feature_width
        pad = config.torch_padding_mode
        eps = config.eps
        self.stem = nn.Sequential(
            nn.Conv2d(1, base, kernel_size=7, stride=1, padding=3, padding_mode=pad),
            InstanceNorm(eps),
            nn.ReLU(),
            nn.Conv2d(base, base * 2, kernel_size=4, stride=2, padding=1, padding_mode=pad),
            InstanceNorm(eps),
            nn.ReLU(),
            nn.Conv2d(base * 2, feature, kernel_size=4, stride=2, padding=1, padding_mode=pad),
            InstanceNorm(eps),
            nn.ReLU(),
        )
        self.res_blocks = nn.Sequential(*[ResBlock(feature, pad, eps) for _ in range(config.n_res_blocks)])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_slice(x, self.image_size, "SharedEncoder")
        return self.res_blocks(self.stem(x))


class SpecificEncoder(nn.Module):
    """
    SPE: style statistics from the pseudo-target.

    Five Conv-ReLU modules without normalization, global average pooling, a
    1x1 conv to the style code, then three linear layers emitting the
    (mean, std) pair(s) for the decoder AdaIN layers.
    """

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.image_size = config.image_size
        self.channels = config.feature_width
        self.layer_count = config.style_layer_count
        base = config.base_width
        widths = [base, base * 2, base * 4, base * 4, base * 4]

        layers = [nn.Conv2d(1, widths[0], kernel_size=7, stride=1, padding=3), nn.ReLU()]
        for c_in, c_out in zip(widths[:-1], widths[1:]):
            layers += [nn.Conv2d(c_in, c_out, kernel_size=4, stride=2, padding=1), nn.ReLU()]
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.style_code = nn.Conv2d(widths[-1], config.style_dim, kernel_size=1)

        hidden = self.channels
        self.mlp = nn.Sequential(
            nn.Linear(config.style_dim, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, 2 * self.channels * self.layer_count),
        )
        # initial style: mean 0, std 1
        with torch.no_grad():
            out = self.mlp[-1].bias.view(self.layer_count, 2, self.channels)
            out[:, 0].zero_()
            out[:, 1].fill_(1.0)

    def encode_style(self, x: torch.Tensor) -> torch.Tensor:
        _check_slice(x, self.image_size, "SpecificEncoder")
        return self.style_code(self.pool(self.features(x))).flatten(1)

    def forward(self, x: torch.Tensor) -> List[StyleStats]:
        params = self.mlp(self.encode_style(x)).view(-1, self.layer_count, 2, self.channels)
        return [StyleStats(mean=params[:, k, 0], std=params[:, k, 1]) for k in range(self.layer_count)]
