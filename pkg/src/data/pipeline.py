"""
Slice preprocessing: empty-slice removal, middle-slice selection, resize,
min-max normalization and subject-level train/test splitting.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from skimage.transform import resize

from src.data.manifest import DatasetManifest
from src.data.models import Modality, ModalityVolume, NormalizationParams, SliceSample
from src.data.volume_io import load_volume
from src.exceptions import DataPipelineError, ShapeMismatchError

logger = logging.getLogger(__name__)

DEFAULT_KEEP_COUNT = 80
DEFAULT_IMAGE_SIZE = 256


def nonempty_slice_indices(volumes: Sequence[ModalityVolume]) -> List[int]:
    """Axial indices where at least one modality has a nonzero voxel."""
    stacked = np.stack([v.voxels for v in volumes])
    has_pixels = np.any(stacked != 0, axis=(0, 2, 3))
    return [int(i) for i in np.flatnonzero(has_pixels)]


def middle_indices(indices: Sequence[int], keep_count: int) -> List[int]:
    """The keep_count entries centered by count within ``indices``."""
    start = (len(indices) - keep_count) // 2
    return list(indices[start:start + keep_count])


def resize_slice(image: np.ndarray, image_size: int) -> np.ndarray:
    if image.shape == (image_size, image_size):
        return image.astype(np.float64)
    return resize(
        image.astype(np.float64),
        (image_size, image_size),
        order=1,
        mode="edge",
        anti_aliasing=False,
        preserve_range=True,
    )


def extract_slices(
    volumes: Mapping[Modality, ModalityVolume],
    source_modalities: Sequence[Modality],
    target_modality: Modality,
    keep_count: int = DEFAULT_KEEP_COUNT,
    image_size: int = DEFAULT_IMAGE_SIZE,
) -> List[SliceSample]:
    """
    Cut one subject's co-registered volumes into aligned SliceSamples.

    Empty slices are dropped, the middle ``keep_count`` of the remainder are
    kept, each slice is bilinearly resized to image_size and min-max
    normalized to [-1, 1] with per-subject, per-modality volume statistics.
    """
    needed = list(source_modalities) + [target_modality]
    missing = [m.value for m in needed if m not in volumes]
    if missing:
        raise DataPipelineError(f"Missing modalities for slice extraction: {missing}")

    selected = [volumes[m] for m in needed]
    subject_id = selected[0].subject_id
    shapes = {v.shape for v in selected}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"Subject {subject_id}: volumes are not co-registered, shapes {shapes}")
    if any(v.subject_id != subject_id for v in selected):
        raise DataPipelineError("extract_slices received volumes from different subjects")

    nonempty = nonempty_slice_indices(selected)
    if len(nonempty) < keep_count:
        raise DataPipelineError(
            f"Subject {subject_id}: only {len(nonempty)} nonempty slices, need {keep_count}"
        )
    kept = middle_indices(nonempty, keep_count)

    params = {m: NormalizationParams.from_array(volumes[m].voxels) for m in needed}

    samples = []
    for index in kept:
        normalized = {
            m: params[m].normalize(resize_slice(volumes[m].axial_slice(index), image_size))
            for m in needed
        }
        samples.append(SliceSample(
            subject_id=subject_id,
            slice_index=index,
            source_modalities=tuple(source_modalities),
            target_modality=target_modality,
            sources=np.stack([normalized[m] for m in source_modalities]).astype(np.float32),
            target=normalized[target_modality].astype(np.float32),
            normalization=params,
        ))

    logger.debug("Subject %s: %d nonempty slices, kept %d", subject_id, len(nonempty), len(samples))
    return samples


def split_subjects(
    subject_ids: Sequence[str], train_count: int, seed: int
) -> Tuple[List[str], List[str]]:
    """Random subject-level split; deterministic in (sorted ids, train_count, seed)."""
    ids = sorted(set(subject_ids))
    if len(ids) != len(subject_ids):
        raise DataPipelineError("split_subjects received duplicate subject ids")
    if not 0 <= train_count <= len(ids):
        raise DataPipelineError(f"train_count {train_count} out of range for {len(ids)} subjects")

    order = np.random.default_rng(seed).permutation(len(ids))
    train = sorted(ids[i] for i in order[:train_count])
    test = sorted(ids[i] for i in order[train_count:])
    return train, test


def denormalize(
    image: np.ndarray, params: Optional[NormalizationParams]
) -> np.ndarray:
    """Map a [-1, 1] slice back to stored intensities."""
    if params is None:
        raise DataPipelineError("denormalize needs the stored normalization parameters")
    return params.denormalize(image)


class SlicePipeline:
    """
    Builds SliceSamples for a whole manifest.

    Subjects are loaded and sliced in parallel; output order is canonical
    (subject_id, slice_index) regardless of completion order.
    """

    MAX_WORKERS = 4

    def __init__(
        self,
        source_modalities: Sequence[Modality],
        target_modality: Modality,
        keep_count: int = DEFAULT_KEEP_COUNT,
        image_size: int = DEFAULT_IMAGE_SIZE,
        max_workers: Optional[int] = None,
    ):
        self.source_modalities = tuple(source_modalities)
        self.target_modality = target_modality
        self.keep_count = keep_count
        self.image_size = image_size
        self.max_workers = max_workers or self.MAX_WORKERS

    @property
    def modalities(self) -> Tuple[Modality, ...]:
        return self.source_modalities + (self.target_modality,)

    def load_subject(self, manifest: DatasetManifest, subject_id: str) -> Dict[Modality, ModalityVolume]:
        record = manifest.get(subject_id)
        return {
            m: load_volume(record.path_for(m), subject_id=subject_id, modality=m)
            for m in self.modalities
        }

    def subject_samples(self, manifest: DatasetManifest, subject_id: str) -> List[SliceSample]:
        volumes = self.load_subject(manifest, subject_id)
        return extract_slices(
            volumes,
            self.source_modalities,
            self.target_modality,
            keep_count=self.keep_count,
            image_size=self.image_size,
        )

    def build(self, manifest: DatasetManifest, subject_ids: Optional[Sequence[str]] = None) -> List[SliceSample]:
        manifest.require_modalities(self.modalities)
        subject_ids = list(subject_ids) if subject_ids is not None else manifest.subject_ids

        samples: List[SliceSample] = []
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {
                executor.submit(self.subject_samples, manifest, sid): sid
                for sid in subject_ids
            }
            for future in as_completed(futures):
                samples.extend(future.result())

        samples.sort(key=lambda s: s.key)
        logger.info("Built %d slices from %d subjects", len(samples), len(subject_ids))
        return samples
