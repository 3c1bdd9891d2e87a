"""
Training objective: conditional-GAN binary cross-entropy for D, the
non-saturating adversarial term for G, and the dual L1 reconstruction term.
"""

from typing import Union

import torch

from src.exceptions import require
from src.training.config import LossWeights

PROB_CLAMP = 1e-7

Probability = Union[float, torch.Tensor]


def _prob(p: Probability) -> torch.Tensor:
    p = p if isinstance(p, torch.Tensor) else torch.tensor(p, dtype=torch.float64)
    return p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)


def discriminator_loss(d_real: Probability, d_fake: Probability) -> torch.Tensor:
    """-[ln D(real) + ln(1 - D(fake))], averaged over the batch."""
    return -(torch.log(_prob(d_real)) + torch.log1p(-_prob(d_fake))).mean()


def generator_adversarial_loss(d_fake: Probability) -> torch.Tensor:
    return -torch.log(_prob(d_fake)).mean()


def reconstruction_loss(
    real: torch.Tensor,
    synthesized: torch.Tensor,
    pseudo: torch.Tensor,
    weights: LossWeights,
) -> torch.Tensor:
    require(
        real.shape == synthesized.shape == pseudo.shape,
        f"L1 inputs differ in shape: {tuple(real.shape)}, {tuple(synthesized.shape)}, {tuple(pseudo.shape)}",
    )
    return (
        weights.lambda1 * (real - synthesized).abs().mean()
        + weights.lambda2 * (real - pseudo).abs().mean()
    )


def total_generator_loss(
    d_fake: Probability,
    real: torch.Tensor,
    synthesized: torch.Tensor,
    pseudo: torch.Tensor,
    weights: LossWeights,
) -> torch.Tensor:
    return generator_adversarial_loss(d_fake) + reconstruction_loss(real, synthesized, pseudo, weights)
