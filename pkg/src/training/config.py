from dataclasses import dataclass

from dataclasses_json import dataclass_json

from src.exceptions import ConfigError


@dataclass_json
@dataclass(frozen=True)
class LossWeights:
    """Weights of the synthesized-target (lambda1) and pseudo-target (lambda2) L1 terms."""

    lambda1: float = 0.1
    lambda2: float = 0.1

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError(f"Loss weights must be non-negative, got {self.lambda1}, {self.lambda2}")

    def scaled(self, factor: float) -> "LossWeights":
        return LossWeights(self.lambda1 * factor, self.lambda2 * factor)


@dataclass_json
@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 3
    base_lr: float = 2e-4
    decay_start_epoch: int = 100
    lambda1: float = 0.1
    lambda2: float = 0.1
    seed: int = 0
    device: str = "cpu"
    checkpoint_every: int = 10
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.base_lr < 0:
            raise ConfigError(f"base_lr must be non-negative, got {self.base_lr}")
        if not 0 <= self.decay_start_epoch <= self.epochs:
            raise ConfigError(
                f"decay_start_epoch must be in 0..epochs ({self.epochs}), got {self.decay_start_epoch}"
            )
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be non-negative (0 disables periodic checkpoints)")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f"Adam betas must be in [0, 1), got ({self.beta1}, {self.beta2})")
        LossWeights(self.lambda1, self.lambda2)

    @property
    def weights(self) -> LossWeights:
        return LossWeights(self.lambda1, self.lambda2)

    @property
    def betas(self):
        return self.beta1, self.beta2
