"""
Volume and slice I/O: NIfTI-1 files and directories of 16-bit PNG slices.

Volumes are always handed out axial-axis first (D × H × W). NIfTI stores the
axial axis last, so readers and writers move it.
"""

import logging
import re
from pathlib import Path
from typing import List, Optional, Union

import nibabel as nib
import numpy as np
from PIL import Image

from src.data.models import Modality, ModalityVolume
from src.exceptions import ModSynthError, VolumeLoadError
from src.interfaces.volume_io import IVolumeReader, IVolumeWriter

logger = logging.getLogger(__name__)

NIFTI_SUFFIXES = (".nii", ".nii.gz")
PNG_MAX = 65535
_PNG_INDEX = re.compile(r"^(\d+)\.png$")


def _is_nifti(path: Path) -> bool:
    return any(path.name.endswith(suffix) for suffix in NIFTI_SUFFIXES)


class NiftiVolumeIO(IVolumeReader, IVolumeWriter):
    """NIfTI-1 reader/writer backed by nibabel."""

    def can_read(self, path: Path) -> bool:
        return path.is_file() and _is_nifti(path)

    def read(self, path: Path, subject_id: str, modality: Modality) -> ModalityVolume:
        try:
            image = nib.load(str(path))
            data = np.asarray(image.get_fdata(dtype=np.float32))
            zooms = image.header.get_zooms()
        except ModSynthError:
            raise
        except Exception as e:
            raise VolumeLoadError(path, f"unreadable NIfTI ({e})") from e

        if data.ndim == 4 and data.shape[-1] == 1:
            data = data[..., 0]
        if data.ndim != 3:
            raise VolumeLoadError(path, f"expected a 3D volume, got shape {data.shape}")

        voxels = np.moveaxis(data, -1, 0)
        spacing = (float(zooms[2]), float(zooms[0]), float(zooms[1])) if len(zooms) >= 3 else (1.0, 1.0, 1.0)
        return ModalityVolume(
            subject_id=subject_id,
            modality=modality,
            voxels=np.ascontiguousarray(voxels),
            spacing=spacing,
            affine=np.asarray(image.affine),
        )

    def write(self, volume: ModalityVolume, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        affine = volume.affine if volume.affine is not None else np.eye(4)
        image = nib.Nifti1Image(
            np.moveaxis(volume.voxels, 0, -1).astype(np.float32), affine
        )
        depth_spacing, row_spacing, col_spacing = volume.spacing
        image.header.set_zooms((row_spacing, col_spacing, depth_spacing))
        nib.save(image, str(path))
        return path


class PngVolumeIO(IVolumeReader, IVolumeWriter):
    """Directory of ``<index:04>.png`` grayscale slices, one per axial index."""

    def can_read(self, path: Path) -> bool:
        return path.is_dir() and any(path.glob("*.png"))

    def read(self, path: Path, subject_id: str, modality: Modality) -> ModalityVolume:
        files = []
        for child in path.iterdir():
            match = _PNG_INDEX.match(child.name)
            if match:
                files.append((int(match.group(1)), child))
        if not files:
            raise VolumeLoadError(path, "no <index>.png slices found")
        files.sort()

        slices = []
        for index, file_path in files:
            image = read_slice(file_path)
            if slices and image.shape != slices[0].shape:
                raise VolumeLoadError(
                    file_path,
                    f"inconsistent slice shape {image.shape}, expected {slices[0].shape}",
                )
            slices.append(image)

        return ModalityVolume(
            subject_id=subject_id,
            modality=modality,
            voxels=np.stack(slices).astype(np.float32),
        )

    def write(self, volume: ModalityVolume, path: Path) -> Path:
        path.mkdir(parents=True, exist_ok=True)
        for index in range(volume.depth):
            data = np.clip(np.rint(volume.axial_slice(index)), 0, PNG_MAX).astype(np.uint16)
            Image.fromarray(data).save(path / f"{index:04d}.png")
        return path


_READERS: List[IVolumeReader] = [NiftiVolumeIO(), PngVolumeIO()]


def load_volume(
    path: Union[str, Path],
    subject_id: str = "",
    modality: Optional[Modality] = None,
) -> ModalityVolume:
    """
    Load a NIfTI-1 file or a PNG slice directory.

    The modality defaults to the file/directory stem (``FLAIR.nii`` → FLAIR).
    """
    path = Path(path)
    if not path.exists():
        raise VolumeLoadError(path, "no such file or directory")
    if modality is None:
        stem = path.name.split(".")[0]
        modality = Modality.parse(stem)
    subject_id = subject_id or path.parent.name

    for reader in _READERS:
        if reader.can_read(path):
            volume = reader.read(path, subject_id, modality)
            logger.debug("Loaded %s %s from %s shape=%s", subject_id, modality.value, path, volume.shape)
            return volume
    raise VolumeLoadError(path, "not a NIfTI-1 file or PNG slice directory")


def save_volume(volume: ModalityVolume, directory: Union[str, Path], fmt: str = "nifti") -> Path:
    """Write ``<directory>/<modality>.nii`` or ``<directory>/<modality>/NNNN.png``."""
    directory = Path(directory)
    if fmt == "nifti":
        return NiftiVolumeIO().write(volume, directory / f"{volume.modality.value}.nii")
    if fmt == "png":
        return PngVolumeIO().write(volume, directory / volume.modality.value)
    raise ValueError(f"Unsupported volume format: {fmt}")


def read_slice(path: Union[str, Path]) -> np.ndarray:
    """Read one 2D slice (PNG or single-slice NIfTI) as float64 in stored units."""
    path = Path(path)
    try:
        if _is_nifti(path):
            data = np.asarray(nib.load(str(path)).get_fdata(), dtype=np.float64)
            data = np.squeeze(data)
        else:
            with Image.open(path) as image:
                data = np.asarray(image, dtype=np.float64)
    except Exception as e:
        raise VolumeLoadError(path, f"unreadable slice ({e})") from e
    if data.ndim != 2:
        raise VolumeLoadError(path, f"expected a 2D slice, got shape {data.shape}")
    return data


def read_unit_slice(path: Union[str, Path]) -> np.ndarray:
    """Read a PNG slice rescaled to [0, 1] by its bit depth."""
    path = Path(path)
    with Image.open(path) as image:
        mode = image.mode
    data = read_slice(path)
    full_scale = 255.0 if mode in ("L", "P", "RGB") else float(PNG_MAX)
    return np.clip(data / full_scale, 0.0, 1.0)


def write_unit_slice(path: Union[str, Path], image: np.ndarray) -> Path:
    """Write an image in [0, 1] as a 16-bit grayscale PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.rint(np.clip(image, 0.0, 1.0) * PNG_MAX).astype(np.uint16)
    Image.fromarray(data).save(path)
    return path
