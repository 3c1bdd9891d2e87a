"""
Exception hierarchy for the synthesis toolkit.

Everything derives from ValueError so callers that already guard
with ``except ValueError`` keep working.
"""

from pathlib import Path
from typing import Optional, Union


class ModSynthError(ValueError):
    """Base class for toolkit errors."""


class ConfigError(ModSynthError):
    """Invalid or unknown configuration values."""


class ShapeMismatchError(ModSynthError):
    """Tensor/array shapes violate an operation's contract."""


class DivisibilityError(ShapeMismatchError):
    """A resolution is not divisible by the requested block/stride size."""


class DataPipelineError(ModSynthError):
    """Slice extraction, splitting or normalization failed."""


class VolumeLoadError(ModSynthError):
    """A volume file could not be read."""

    def __init__(self, path: Union[str, Path], reason: str):
        self.path = Path(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class MetricError(ModSynthError):
    """A metric is undefined for the given inputs."""


class CheckpointError(ModSynthError):
    """Checkpoint could not be written, read or is incompatible."""


class ExperimentError(ModSynthError):
    """An experiment matrix is malformed."""


def require(condition: bool, message: str, error: Optional[type] = None) -> None:
    """Raise ``error`` (ShapeMismatchError by default) unless condition holds."""
    if not condition:
        raise (error or ShapeMismatchError)(message)
