from .config import LossWeights, TrainConfig
from .losses import (
    PROB_CLAMP,
    discriminator_loss,
    generator_adversarial_loss,
    reconstruction_loss,
    total_generator_loss,
)
from .manifest import EpochRecord, ManifestWriter, RunManifest, read_manifest_log
from .schedule import LinearDecayScheduler, decay_factor, lr_schedule
from .seeding import seed_everything
from .trainer import StepResult, Trainer, TrainResult, build_models, train

__all__ = [
    "PROB_CLAMP",
    "EpochRecord",
    "LinearDecayScheduler",
    "LossWeights",
    "ManifestWriter",
    "RunManifest",
    "StepResult",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "build_models",
    "decay_factor",
    "discriminator_loss",
    "generator_adversarial_loss",
    "lr_schedule",
    "read_manifest_log",
    "reconstruction_loss",
    "seed_everything",
    "total_generator_loss",
]
