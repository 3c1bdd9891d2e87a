from typing import Sequence

from torch.optim import Optimizer
from torch.optim.lr_scheduler import LambdaLR

from src.exceptions import ConfigError
from src.training.config import TrainConfig


def decay_factor(epoch: int, config: TrainConfig) -> float:
    if not 1 <= epoch <= config.epochs:
        raise ConfigError(f"epoch {epoch} outside 1..{config.epochs}")
    if epoch <= config.decay_start_epoch:
        return 1.0
    return (config.epochs - epoch) / (config.epochs - config.decay_start_epoch)


def lr_schedule(epoch: int, config: TrainConfig) -> float:
    """Constant base_lr through decay_start_epoch, then linear to 0 at the last epoch."""
    return config.base_lr * decay_factor(epoch, config)


class LinearDecayScheduler:
    """
    Applies lr_schedule to every optimizer. Construct before the first epoch
    and call ``step()`` after each epoch.
    """

    def __init__(self, optimizers: Sequence[Optimizer], config: TrainConfig):
        self.config = config
        self._epoch = 1
        self._schedulers = [
            LambdaLR(optimizer, lr_lambda=self._factor) for optimizer in optimizers
        ]

    def _factor(self, index: int) -> float:
        return decay_factor(min(index + 1, self.config.epochs), self.config)

    @property
    def epoch(self) -> int:
        return self._epoch

    @property
    def current_lr(self) -> float:
        return lr_schedule(self._epoch, self.config)

    def step(self) -> None:
        for scheduler in self._schedulers:
            scheduler.step()
        self._epoch = min(self._epoch + 1, self.config.epochs)
