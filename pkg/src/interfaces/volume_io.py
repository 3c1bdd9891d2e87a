from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.data.models import Modality, ModalityVolume


class IVolumeReader(ABC):
    """Interface for reading one modality volume from disk."""

    @abstractmethod
    def can_read(self, path: Path) -> bool:
        """Whether this reader understands the given path."""
        pass

    @abstractmethod
    def read(self, path: Path, subject_id: str, modality: "Modality") -> "ModalityVolume":
        """Read the volume at path."""
        pass


class IVolumeWriter(ABC):
    """Interface for writing one modality volume to disk."""

    @abstractmethod
    def write(self, volume: "ModalityVolume", path: Path) -> Path:
        """Write the volume and return the path actually written."""
        pass
