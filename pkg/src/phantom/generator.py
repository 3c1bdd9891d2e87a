"""
Procedural multi-modal phantom.

All four modalities of a subject are rendered from one integer label field:
label 0 is background, label 1 the head and labels 2.. the inner ellipsoids.
Each modality maps labels to intensities through its own contrast table and
adds a bounded, smooth, modality-specific texture inside the head. The target
modality is therefore an exact function of the shared labels plus noise.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from dataclasses_json import dataclass_json
from scipy.ndimage import gaussian_filter

from src.data.manifest import DatasetManifest, SubjectRecord
from src.data.models import Modality, ModalityVolume
from src.data.volume_io import save_volume
from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

# Region classes: parenchyma, white matter, grey matter, CSF, lesion, edema, necrosis, vessel.
DEFAULT_CONTRAST: Dict[str, List[float]] = {
    Modality.T1.value: [520.0, 680.0, 430.0, 150.0, 380.0, 460.0, 260.0, 600.0],
    Modality.T1C.value: [500.0, 660.0, 420.0, 160.0, 720.0, 450.0, 240.0, 900.0],
    Modality.T2.value: [450.0, 300.0, 520.0, 900.0, 700.0, 780.0, 820.0, 400.0],
    Modality.FLAIR.value: [470.0, 330.0, 540.0, 90.0, 880.0, 820.0, 300.0, 420.0],
}


@dataclass_json
@dataclass
class PhantomSpec:
    seed: int = 0
    subject_count: int = 12
    depth: int = 32
    height: int = 96
    width: int = 96
    shape_count: int = 6
    texture_amplitude: float = 20.0
    texture_sigma: float = 1.0
    contrast: Dict[str, List[float]] = field(default_factory=lambda: {
        k: list(v) for k, v in DEFAULT_CONTRAST.items()
    })

    def validate(self) -> "PhantomSpec":
        if self.shape_count < 1:
            raise ConfigError("PhantomSpec.shape_count must be at least 1")
        if self.subject_count < 1:
            raise ConfigError("PhantomSpec.subject_count must be at least 1")
        if min(self.depth, self.height, self.width) < 4:
            raise ConfigError("PhantomSpec volume dimensions must be at least 4")
        if self.texture_amplitude < 0:
            raise ConfigError("PhantomSpec.texture_amplitude must be non-negative")
        for modality in Modality:
            table = self.contrast.get(modality.value)
            if not table:
                raise ConfigError(f"PhantomSpec.contrast has no table for {modality.value}")
        return self

    def contrast_lookup(self, modality: Modality) -> np.ndarray:
        """Intensity per label for labels 0 .. shape_count + 1."""
        table = self.contrast[modality.value]
        lookup = np.zeros(self.shape_count + 2, dtype=np.float64)
        for label in range(1, self.shape_count + 2):
            lookup[label] = table[(label - 1) % len(table)]
        return lookup

    def subject_id(self, subject_index: int) -> str:
        return f"phantom_{subject_index:03d}"


def _ellipsoid_mask(grid, center, semi_axes, angle) -> np.ndarray:
    z, y, x = grid
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    dy, dx = y - center[1], x - center[2]
    ry = cos_a * dy + sin_a * dx
    rx = -sin_a * dy + cos_a * dx
    return (
        ((z - center[0]) / semi_axes[0]) ** 2
        + (ry / semi_axes[1]) ** 2
        + (rx / semi_axes[2]) ** 2
    ) <= 1.0


def generate_labels(spec: PhantomSpec, subject_index: int) -> np.ndarray:
    """The shared label field of one subject (D × H × W, int16)."""
    spec.validate()
    rng = np.random.default_rng([spec.seed, subject_index])
    shape = (spec.depth, spec.height, spec.width)
    grid = np.meshgrid(*(np.arange(n, dtype=np.float64) for n in shape), indexing="ij")
    center = np.array([(n - 1) / 2.0 for n in shape])

    head_axes = np.array(shape, dtype=np.float64) * rng.uniform(0.36, 0.44, size=3)
    head = _ellipsoid_mask(grid, center, head_axes, rng.uniform(-0.3, 0.3))
    labels = np.zeros(shape, dtype=np.int16)
    labels[head] = 1

    for k in range(spec.shape_count):
        offset = rng.uniform(-0.45, 0.45, size=3) * head_axes
        axes = np.maximum(np.array(shape) * rng.uniform(0.08, 0.22, size=3), 1.0)
        inner = _ellipsoid_mask(grid, center + offset, axes, rng.uniform(0, np.pi))
        labels[inner & head] = k + 2
    return labels


def texture_field(spec: PhantomSpec, subject_index: int, modality: Modality, head: np.ndarray) -> np.ndarray:
    """Smooth modality-specific texture bounded by texture_amplitude, zero outside the head."""
    ordinal = list(Modality).index(modality) + 1
    rng = np.random.default_rng([spec.seed, subject_index, ordinal])
    noise = gaussian_filter(rng.standard_normal(head.shape), sigma=spec.texture_sigma)
    peak = np.max(np.abs(noise))
    if peak > 0:
        noise = noise / peak
    return noise * spec.texture_amplitude * head


def generate_subject(spec: PhantomSpec, subject_index: int) -> Dict[Modality, ModalityVolume]:
    """All four modality volumes of one subject, deterministic in (seed, subject_index)."""
    labels = generate_labels(spec, subject_index)
    head = labels > 0
    subject_id = spec.subject_id(subject_index)

    volumes = {}
    for modality in Modality:
        clean = spec.contrast_lookup(modality)[labels]
        voxels = clean + texture_field(spec, subject_index, modality, head)
        volumes[modality] = ModalityVolume(
            subject_id=subject_id,
            modality=modality,
            voxels=voxels.astype(np.float32),
        )
    return volumes


def write_dataset(
    spec: PhantomSpec,
    out_dir: Union[str, Path],
    fmt: str = "nifti",
) -> DatasetManifest:
    """Render every subject to ``<out_dir>/<subject_id>/`` and write the manifest."""
    spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = DatasetManifest(root=out_dir)
    for index in range(spec.subject_count):
        volumes = generate_subject(spec, index)
        subject_dir = out_dir / spec.subject_id(index)
        paths = {m: save_volume(v, subject_dir, fmt=fmt) for m, v in volumes.items()}
        manifest.subjects.append(SubjectRecord(subject_id=spec.subject_id(index), paths=paths))
        logger.info("Wrote phantom subject %s", spec.subject_id(index))

    manifest.write()
    (out_dir / "phantom_spec.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True))
    return manifest
