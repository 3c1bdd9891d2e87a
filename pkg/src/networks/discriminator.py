import torch
from torch import nn

from src.exceptions import require
from src.networks.config import DiscriminatorConfig


class Discriminator(nn.Module):
    """
    Five stride-2 conv blocks over the stacked sources and target, a 1-channel
    3x3 projection, sigmoid, and the spatial mean as the real/fake probability.

    Batch normalization is used in the interior blocks (2 to 4).
    """

    def __init__(self, config: DiscriminatorConfig):
        super().__init__()
        self.config = config
        widths = config.widths
        blocks = []
        c_in = config.in_channels
        for k, c_out in enumerate(widths):
            interior = 0 < k < len(widths) - 1
            layers = [nn.Conv2d(c_in, c_out, kernel_size=4, stride=2, padding=1, bias=not interior)]
            if interior:
                layers.append(nn.BatchNorm2d(c_out))
            layers.append(nn.LeakyReLU(config.negative_slope))
            blocks.append(nn.Sequential(*layers))
            c_in = c_out
        self.blocks = nn.Sequential(*blocks)
        self.head = nn.Conv2d(c_in, 1, kernel_size=3, stride=1, padding=1)

    def probability_map(self, sources: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        require(
            sources.dim() == 4 and target.dim() == 4,
            f"Discriminator expects 4-D inputs, got {tuple(sources.shape)} and {tuple(target.shape)}",
        )
        require(
            sources.shape[1] == self.config.modality_count and target.shape[1] == 1,
            f"Discriminator expects {self.config.modality_count} source channels and 1 target channel, "
            f"got {sources.shape[1]} and {target.shape[1]}",
        )
        require(
            sources.shape[-2:] == target.shape[-2:],
            f"Source {tuple(sources.shape[-2:])} and target {tuple(target.shape[-2:])} resolutions differ",
        )
        size = sources.shape[-1]
        minimum = self.config.min_resolution
        require(
            sources.shape[-2] == size and size >= minimum and size % minimum == 0,
            f"Discriminator needs square inputs divisible by {minimum}, got {tuple(sources.shape[-2:])}",
        )
        x = torch.cat([sources, target], dim=1)
        return torch.sigmoid(self.head(self.blocks(x)))

    def forward(self, sources: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        """Probability that ``target`` is real given ``sources``, shape ``(N,)``."""
        return self.probability_map(sources, target).mean(dim=(1, 2, 3))
