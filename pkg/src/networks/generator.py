import logging
from typing import List, Sequence, Tuple

import torch
from torch import nn

from src.exceptions import require
from src.networks.blocks import AdaINResBlock, CatConvFusion, InstanceNorm, LocalAdaptiveFusion, StyleStats
from src.networks.config import GeneratorConfig
from src.networks.encoders import SharedEncoder, SpecificEncoder

logger = logging.getLogger(__name__)


class Decoder(nn.Module):
    """AdaIN residual blocks followed by the up-sampling head (S/4 -> S/2 -> S, tanh)."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        feature, base = config.feature_width, config.base_width
        pad = config.torch_padding_mode
        self.res_blocks = nn.ModuleList(
            [AdaINResBlock(feature, pad, config.eps) for _ in range(config.n_res_blocks)]
        )
        self.head = nn.Sequential(
            nn.ConvTranspose2d(feature, base * 2, kernel_size=4, stride=2, padding=1),
            InstanceNorm(config.eps),
            nn.ReLU(),
            nn.ConvTranspose2d(base * 2, base, kernel_size=4, stride=2, padding=1),
            InstanceNorm(config.eps),
            nn.ReLU(),
            nn.ConvTranspose2d(base, 1, kernel_size=7, stride=1, padding=3),
            nn.Tanh(),
        )

    def forward(self, x: torch.Tensor, styles: Sequence[StyleStats]) -> torch.Tensor:
        needed = 2 * len(self.res_blocks)
        if len(styles) == 1:
            styles = list(styles) * needed
        require(len(styles) == needed, f"Decoder needs 1 or {needed} StyleStats, got {len(styles)}")
        for k, block in enumerate(self.res_blocks):
            x = block(x, styles[2 * k], styles[2 * k + 1])
        return self.head(x)


class Generator(nn.Module):
    """
    G with its LAF front-end F.

    ``forward`` takes the stacked sources ``(N, M, S, S)`` and returns
    ``(synthesized, pseudo_target)``, both ``(N, 1, S, S)``.
    """

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        self.laf = LocalAdaptiveFusion(config.modality_count, config.image_size, config.laf_block_size)
        self.shared_encoders = nn.ModuleList([SharedEncoder(config) for _ in range(config.modality_count)])
        self.fusion = CatConvFusion(config.feature_width, config.modality_count)
        self.specific_encoder = SpecificEncoder(config)
        self.decoder = Decoder(config)

    def _check_input(self, x: torch.Tensor) -> None:
        size = self.config.image_size
        require(
            x.dim() == 4 and x.shape[1] == self.config.modality_count,
            f"Generator built for {self.config.modality_count} modalities, got input {tuple(x.shape)}",
        )
        require(
            x.shape[-2:] == (size, size),
            f"Generator built for {size}x{size} slices, got {tuple(x.shape[-2:])}",
        )

    def encode_shared(self, x: torch.Tensor) -> List[torch.Tensor]:
        """Per-modality shared feature maps, one SRE each."""
        self._check_input(x)
        return [encoder(x[:, m:m + 1]) for m, encoder in enumerate(self.shared_encoders)]

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        self._check_input(x)
        pseudo = self.laf(x)
        styles = self.specific_encoder(pseudo)
        fused = self.fusion(self.encode_shared(x))
        return self.decoder(fused, styles), pseudo


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
