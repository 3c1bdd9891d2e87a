"""
Data models for multi-modal MRI volumes and the 2D slice samples cut from them.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import DataPipelineError, ShapeMismatchError


class Modality(Enum):
    T1 = "T1"
    T1C = "T1c"
    T2 = "T2"
    FLAIR = "FLAIR"

    @classmethod
    def parse(cls, value) -> "Modality":
        """Case-insensitive lookup by name or value ("t1c", "T1C", Modality.T1C)."""
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for member in cls:
            if text.lower() in (member.value.lower(), member.name.lower()):
                return member
        raise DataPipelineError(
            f"Unknown modality {value!r}; expected one of {[m.value for m in cls]}"
        )

    @classmethod
    def parse_many(cls, values: Sequence) -> Tuple["Modality", ...]:
        return tuple(cls.parse(v) for v in values)


def synthesis_label(sources: Sequence[Modality], target: Modality) -> str:
    """Row label in the reporting convention, e.g. ``T1+T2→FLAIR``."""
    return "+".join(m.value for m in sources) + "→" + target.value


@dataclass(frozen=True)
class NormalizationParams:
    """Min/max of the intensities that were mapped onto [-1, 1]."""

    minimum: float
    maximum: float

    @classmethod
    def from_array(cls, values: np.ndarray) -> "NormalizationParams":
        return cls(float(np.min(values)), float(np.max(values)))

    @property
    def is_constant(self) -> bool:
        return self.maximum == self.minimum

    def normalize(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if self.is_constant:
            # Degenerate range maps to the midpoint.
            return np.zeros_like(values)
        scaled = 2.0 * (values - self.minimum) / (self.maximum - self.minimum) - 1.0
        return np.clip(scaled, -1.0, 1.0)

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        return (values + 1.0) / 2.0 * (self.maximum - self.minimum) + self.minimum

    def to_dict(self) -> Dict[str, float]:
        return {"minimum": self.minimum, "maximum": self.maximum}


@dataclass
class ModalityVolume:
    """One subject's 3D scan for one modality, axial axis first (D × H × W)."""

    subject_id: str
    modality: Modality
    voxels: np.ndarray
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    affine: Optional[np.ndarray] = None

    def __post_init__(self):
        self.voxels = np.asarray(self.voxels)
        if self.voxels.ndim != 3:
            raise ShapeMismatchError(
                f"{self.subject_id}/{self.modality.value}: expected a 3D volume, "
                f"got shape {self.voxels.shape}"
            )
        if not np.all(np.isfinite(self.voxels)):
            raise DataPipelineError(
                f"{self.subject_id}/{self.modality.value}: volume contains non-finite voxels"
            )
        self.spacing = tuple(float(s) for s in self.spacing)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.voxels.shape)

    @property
    def depth(self) -> int:
        return self.voxels.shape[0]

    def axial_slice(self, index: int) -> np.ndarray:
        return self.voxels[index]


@dataclass
class SliceSample:
    """
    Aligned source slices plus the target slice at one axial index.

    ``sources`` is M × S × S and ``target`` is S × S, both in [-1, 1].
    """

    subject_id: str
    slice_index: int
    source_modalities: Tuple[Modality, ...]
    target_modality: Modality
    sources: np.ndarray
    target: np.ndarray
    normalization: Dict[Modality, NormalizationParams] = field(default_factory=dict)

    def __post_init__(self):
        if self.sources.ndim != 3 or self.sources.shape[0] != len(self.source_modalities):
            raise ShapeMismatchError(
                f"sources must be M×S×S with M={len(self.source_modalities)}, "
                f"got {self.sources.shape}"
            )
        if self.target.shape != self.sources.shape[1:]:
            raise ShapeMismatchError(
                f"target shape {self.target.shape} does not match sources {self.sources.shape[1:]}"
            )

    @property
    def key(self) -> Tuple[str, int]:
        return (self.subject_id, self.slice_index)

    @property
    def image_size(self) -> int:
        return self.target.shape[-1]
