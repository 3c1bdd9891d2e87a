import tempfile
from pathlib import Path

import nibabel as nib
import numpy as np
import torch
from django.test import SimpleTestCase
from PIL import Image

from src.data import (
    DatasetManifest,
    Modality,
    ModalityVolume,
    NormalizationParams,
    SliceDataset,
    SlicePipeline,
    SubjectRecord,
    denormalize,
    extract_slices,
    load_volume,
    make_loader,
    save_volume,
    split_subjects,
    synthesis_label,
)
from src.exceptions import DataPipelineError, ShapeMismatchError, VolumeLoadError
from synthesis.tests.factories import tiny_phantom

SOURCES = (Modality.T1, Modality.T2)
TARGET = Modality.FLAIR


def brats_like_subject(subject_id="s001", first=20, count=120, depth=155, size=240):
    """Three co-registered volumes with ``count`` nonempty axial slices starting at ``first``."""
    rng = np.random.default_rng(0)
    volumes = {}
    for offset, modality in enumerate(SOURCES + (TARGET,)):
        voxels = np.zeros((depth, size, size), dtype=np.float32)
        voxels[first:first + count, 40:200, 40:200] = rng.uniform(50, 800, (count, 160, 160)) + offset
        volumes[modality] = ModalityVolume(subject_id=subject_id, modality=modality, voxels=voxels)
    return volumes


class ModalityTests(SimpleTestCase):
    def test_parse(self):
        self.assertIs(Modality.parse("t1c"), Modality.T1C)
        self.assertIs(Modality.parse("FLAIR"), Modality.FLAIR)
        self.assertEqual(Modality.parse_many(["T1", "t2"]), SOURCES)

    def test_unknown(self):
        with self.assertRaises(DataPipelineError):
            Modality.parse("PD")

    def test_label(self):
        self.assertEqual(synthesis_label(SOURCES, TARGET), "T1+T2→FLAIR")


class ExtractSlicesTests(SimpleTestCase):
    def test_middle_eighty_of_brats_volume(self):
        samples = extract_slices(brats_like_subject(), SOURCES, TARGET, keep_count=80, image_size=256)
        self.assertEqual(len(samples), 80)
        self.assertEqual([s.slice_index for s in samples], list(range(40, 120)))
        self.assertEqual(samples[0].sources.shape, (2, 256, 256))
        self.assertEqual(samples[0].target.shape, (256, 256))
        for sample in samples[::10]:
            self.assertGreaterEqual(float(sample.sources.min()), -1.0)
            self.assertLessEqual(float(sample.sources.max()), 1.0)
            self.assertEqual(sample.source_modalities, SOURCES)

    def test_empty_slices_are_dropped_before_selection(self):
        volumes = brats_like_subject(depth=20, first=0, count=10, size=32)
        for volume in volumes.values():
            volume.voxels[3] = 0
        samples = extract_slices(volumes, SOURCES, TARGET, keep_count=5, image_size=32)
        self.assertEqual([s.slice_index for s in samples], [2, 4, 5, 6, 7])

    def test_nonzero_in_one_modality_keeps_slice(self):
        volumes = brats_like_subject(depth=10, first=2, count=4, size=32)
        volumes[Modality.T2].voxels[9, 0, 0] = 1.0
        samples = extract_slices(volumes, SOURCES, TARGET, keep_count=5, image_size=32)
        self.assertEqual([s.slice_index for s in samples], [2, 3, 4, 5, 9])

    def test_all_zero_volume(self):
        volumes = {
            m: ModalityVolume("s", m, np.zeros((4, 32, 32))) for m in SOURCES + (TARGET,)
        }
        with self.assertRaisesMessage(DataPipelineError, "s: only 0 nonempty slices"):
            extract_slices(volumes, SOURCES, TARGET, keep_count=1, image_size=32)

    def test_missing_modality(self):
        volumes = brats_like_subject(depth=10, first=0, count=10, size=32)
        del volumes[TARGET]
        with self.assertRaises(DataPipelineError):
            extract_slices(volumes, SOURCES, TARGET, keep_count=2, image_size=32)

    def test_not_co_registered(self):
        volumes = brats_like_subject(depth=10, first=0, count=10, size=32)
        volumes[TARGET] = ModalityVolume("s001", TARGET, np.ones((10, 16, 16)))
        with self.assertRaises(ShapeMismatchError):
            extract_slices(volumes, SOURCES, TARGET, keep_count=2, image_size=32)

    def test_slices_stay_aligned(self):
        volumes = brats_like_subject(depth=12, first=0, count=12, size=32)
        for modality, volume in volumes.items():
            for index in range(12):
                volume.voxels[index] = index + 1
        samples = extract_slices(volumes, SOURCES, TARGET, keep_count=6, image_size=32)
        for sample in samples:
            levels = {round(float(sample.target.mean()), 5)} | {
                round(float(s.mean()), 5) for s in sample.sources
            }
            self.assertEqual(len(levels), 1)


class NormalizationTests(SimpleTestCase):
    def test_round_trip(self):
        values = np.random.default_rng(1).uniform(-30, 900, (16, 16))
        params = NormalizationParams.from_array(values)
        restored = denormalize(params.normalize(values), params)
        np.testing.assert_allclose(restored, values, atol=1e-6, rtol=0)

    def test_constant_maps_to_zero(self):
        params = NormalizationParams.from_array(np.full((4, 4), 7.0))
        np.testing.assert_array_equal(params.normalize(np.full((4, 4), 7.0)), np.zeros((4, 4)))

    def test_affine_map(self):
        params = NormalizationParams(minimum=0.0, maximum=2.0)
        self.assertEqual(float(params.normalize(np.array(1.0))), 0.0)

    def test_missing_params(self):
        with self.assertRaises(DataPipelineError):
            denormalize(np.zeros((2, 2)), None)


class SplitSubjectsTests(SimpleTestCase):
    def test_full_scale_cohorts(self):
        ids = [f"brats_{i:03d}" for i in range(164)]
        train, test = split_subjects(ids, 126, seed=0)
        self.assertEqual((len(train), len(test)), (126, 38))
        self.assertFalse(set(train) & set(test))
        self.assertEqual(set(train) | set(test), set(ids))
        self.assertEqual(len(train) * 80, 10080)

    def test_deterministic(self):
        ids = [f"s{i}" for i in range(20)]
        self.assertEqual(split_subjects(ids, 12, seed=5), split_subjects(list(reversed(ids)), 12, seed=5))
        self.assertNotEqual(split_subjects(ids, 12, seed=5), split_subjects(ids, 12, seed=6))

    def test_out_of_range(self):
        with self.assertRaises(DataPipelineError):
            split_subjects(["a", "b"], 3, seed=0)

    def test_duplicates(self):
        with self.assertRaises(DataPipelineError):
            split_subjects(["a", "a", "b"], 1, seed=0)


class VolumeIOTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_nifti_axial_axis_first(self):
        data = np.arange(240 * 240 * 155, dtype=np.float32).reshape(240, 240, 155)
        path = self.dir / "s1" / "FLAIR.nii"
        path.parent.mkdir()
        nib.save(nib.Nifti1Image(data, np.eye(4)), str(path))
        volume = load_volume(path)
        self.assertEqual(volume.shape, (155, 240, 240))
        self.assertEqual((volume.subject_id, volume.modality), ("s1", TARGET))
        np.testing.assert_array_equal(volume.axial_slice(7), data[:, :, 7])

    def test_nifti_and_png_agree(self):
        voxels = np.random.default_rng(2).integers(0, 4000, (6, 24, 24)).astype(np.float32)
        volume = ModalityVolume("s2", Modality.T1, voxels)
        nifti = load_volume(save_volume(volume, self.dir / "nifti", fmt="nifti"), subject_id="s2")
        png = load_volume(save_volume(volume, self.dir / "png", fmt="png"), subject_id="s2")
        np.testing.assert_array_equal(nifti.voxels, voxels)
        np.testing.assert_array_equal(png.voxels, voxels)
        self.assertEqual(sorted(p.name for p in (self.dir / "png" / "T1").iterdir())[:2], ["0000.png", "0001.png"])

    def test_truncated_nifti(self):
        path = self.dir / "T1.nii.gz"
        path.write_bytes(b"\x1f\x8b\x08\x00broken")
        with self.assertRaises(VolumeLoadError) as ctx:
            load_volume(path)
        self.assertEqual(ctx.exception.path, path)
        self.assertIn(str(path), str(ctx.exception))

    def test_inconsistent_png_slices(self):
        directory = self.dir / "T2"
        directory.mkdir()
        Image.fromarray(np.zeros((8, 8), dtype=np.uint16)).save(directory / "0000.png")
        Image.fromarray(np.zeros((9, 9), dtype=np.uint16)).save(directory / "0001.png")
        with self.assertRaisesMessage(VolumeLoadError, "inconsistent slice shape"):
            load_volume(directory)

    def test_missing_path(self):
        with self.assertRaises(VolumeLoadError):
            load_volume(self.dir / "T1.nii")


class ManifestAndDatasetTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name) / "phantom"
        self.manifest = tiny_phantom(self.root, subjects=3)

    def test_manifest_round_trip(self):
        manifest = DatasetManifest.read(self.root / "manifest.csv")
        self.assertEqual(manifest.subject_ids, ["phantom_000", "phantom_001", "phantom_002"])
        self.assertEqual(manifest.get("phantom_001").path_for(TARGET), self.root / "phantom_001" / "FLAIR.nii")

    def test_manifest_missing_modality(self):
        manifest = DatasetManifest(root=self.root, subjects=[SubjectRecord("x", {Modality.T1: self.root / "T1.nii"})])
        with self.assertRaises(DataPipelineError):
            manifest.require_modalities(SOURCES)
        with self.assertRaises(DataPipelineError):
            manifest.get("y")

    def test_pipeline_canonical_order(self):
        pipeline = SlicePipeline(SOURCES, TARGET, keep_count=4, image_size=32, max_workers=3)
        samples = pipeline.build(DatasetManifest.read(self.root))
        self.assertEqual(len(samples), 12)
        self.assertEqual([s.key for s in samples], sorted(s.key for s in samples))

    def test_dataset_batches(self):
        samples = SlicePipeline(SOURCES, TARGET, keep_count=4, image_size=32).build(
            DatasetManifest.read(self.root), ["phantom_000"]
        )
        dataset = SliceDataset(samples)
        item = dataset[1]
        self.assertEqual(tuple(item["sources"].shape), (2, 32, 32))
        self.assertEqual(tuple(item["target"].shape), (1, 32, 32))
        self.assertEqual(dataset.sample(int(item["index"])).slice_index, samples[1].slice_index)

        first = [b["index"].tolist() for b in make_loader(dataset, 3, seed=4)]
        second = [b["index"].tolist() for b in make_loader(dataset, 3, seed=4)]
        self.assertEqual(first, second)
        self.assertEqual(sorted(sum(first, [])), [0, 1, 2, 3])

    def test_empty_dataset(self):
        with self.assertRaises(DataPipelineError):
            SliceDataset([])

    def test_item_dtype(self):
        samples = SlicePipeline(SOURCES, TARGET, keep_count=4, image_size=32).build(
            DatasetManifest.read(self.root), ["phantom_002"]
        )
        self.assertEqual(SliceDataset(samples, dtype=torch.float64)[0]["sources"].dtype, torch.float64)
