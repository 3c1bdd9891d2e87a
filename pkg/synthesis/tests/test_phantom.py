import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from src.data import DatasetManifest, Modality, load_volume
from src.exceptions import ConfigError
from src.phantom import PhantomSpec, generate_labels, generate_subject, write_dataset

SMALL = PhantomSpec(seed=3, subject_count=2, depth=12, height=40, width=40, shape_count=4)


class GenerateSubjectTests(SimpleTestCase):
    def test_deterministic(self):
        first, second = generate_subject(SMALL, 1), generate_subject(SMALL, 1)
        for modality in Modality:
            with self.subTest(modality=modality.value):
                self.assertTrue(np.array_equal(first[modality].voxels, second[modality].voxels))

    def test_seed_and_index_change_output(self):
        base = generate_subject(SMALL, 0)[Modality.T1].voxels
        other_index = generate_subject(SMALL, 1)[Modality.T1].voxels
        other_seed = generate_subject(PhantomSpec(**{**SMALL.to_dict(), "seed": 4}), 0)[Modality.T1].voxels
        self.assertFalse(np.array_equal(base, other_index))
        self.assertFalse(np.array_equal(base, other_seed))

    def test_all_modalities_share_the_head_mask(self):
        volumes = generate_subject(SMALL, 0)
        labels = generate_labels(SMALL, 0)
        for modality, volume in volumes.items():
            with self.subTest(modality=modality.value):
                self.assertEqual(volume.shape, (12, 40, 40))
                self.assertEqual(volume.subject_id, "phantom_000")
                np.testing.assert_array_equal(volume.voxels != 0, labels > 0)

    def test_residual_after_contrast_oracle_is_bounded(self):
        volumes = generate_subject(SMALL, 1)
        labels = generate_labels(SMALL, 1)
        for modality in Modality:
            residual = volumes[modality].voxels - SMALL.contrast_lookup(modality)[labels]
            with self.subTest(modality=modality.value):
                self.assertLessEqual(float(np.abs(residual).max()), SMALL.texture_amplitude + 1e-3)
                self.assertGreater(float(np.abs(residual).max()), 0.0)

    def test_inner_regions_exist(self):
        labels = generate_labels(SMALL, 0)
        self.assertGreater(len(np.unique(labels)), 2)
        self.assertLessEqual(int(labels.max()), SMALL.shape_count + 1)

    def test_invalid_spec(self):
        for overrides in ({"shape_count": 0}, {"subject_count": 0}, {"depth": 2}, {"texture_amplitude": -1.0}):
            spec = PhantomSpec(**{**SMALL.to_dict(), **overrides})
            with self.subTest(**overrides), self.assertRaises(ConfigError):
                generate_subject(spec, 0)

    def test_missing_contrast_table(self):
        contrast = {k: v for k, v in SMALL.contrast.items() if k != "FLAIR"}
        with self.assertRaises(ConfigError):
            PhantomSpec(contrast=contrast).validate()


class WriteDatasetTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_nifti_dataset(self):
        manifest = write_dataset(SMALL, self.dir / "nifti")
        self.assertEqual(manifest.subject_ids, ["phantom_000", "phantom_001"])
        reread = DatasetManifest.read(self.dir / "nifti")
        volume = load_volume(reread.get("phantom_001").path_for(Modality.FLAIR), subject_id="phantom_001")
        expected = generate_subject(SMALL, 1)[Modality.FLAIR].voxels
        np.testing.assert_array_equal(volume.voxels, expected)

        stored = json.loads((self.dir / "nifti" / "phantom_spec.json").read_text())
        self.assertEqual(PhantomSpec.from_dict(stored), SMALL)

    def test_png_dataset(self):
        write_dataset(SMALL, self.dir / "png", fmt="png")
        slices = sorted((self.dir / "png" / "phantom_000" / "T2").glob("*.png"))
        self.assertEqual(len(slices), SMALL.depth)
        volume = load_volume(self.dir / "png" / "phantom_000" / "T2", subject_id="phantom_000")
        expected = generate_subject(SMALL, 0)[Modality.T2].voxels
        self.assertLessEqual(float(np.abs(volume.voxels - expected).max()), 0.5)

    def test_rewrite_is_byte_identical(self):
        write_dataset(SMALL, self.dir / "a")
        write_dataset(SMALL, self.dir / "b")
        for name in ("manifest.csv", "phantom_spec.json", "phantom_000/T1.nii"):
            with self.subTest(file=name):
                self.assertEqual((self.dir / "a" / name).read_bytes(), (self.dir / "b" / name).read_bytes())
