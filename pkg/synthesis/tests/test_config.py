import os
import tempfile
from pathlib import Path
from unittest.mock import patch

from django.conf import settings
from django.test import SimpleTestCase

from src.config import FIELD_PROVENANCE, CliConfig
from src.data import Modality
from src.exceptions import ConfigError, DivisibilityError

CONFIG_DIR = Path(settings.BASE_DIR) / "configs"


class CliConfigTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_defaults_are_full_scale(self):
        config = CliConfig.from_mapping({})
        self.assertEqual((config.epochs, config.lr, config.batch_size), (200, 2e-4, 3))
        self.assertEqual((config.image_size, config.laf_block_size, config.keep_count), (256, 128, 80))
        self.assertEqual(config.label, "T1+T2→FLAIR")
        self.assertEqual(config.source_modalities, (Modality.T1, Modality.T2))

    def test_sub_configs(self):
        config = CliConfig.from_mapping({"modalities": ["T1", "T2", "T1c"], "width_scale": 0.5, "lr": 1e-4})
        generator = config.to_generator_config()
        self.assertEqual((generator.modality_count, generator.width_scale), (3, 0.5))
        self.assertEqual(config.to_train_config().base_lr, 1e-4)

    def test_unknown_key(self):
        with self.assertRaisesMessage(ConfigError, "lamda1"):
            CliConfig.from_mapping({"lamda1": 0.2})

    def test_invalid_values(self):
        for data, error in (
            ({"laf_block_size": 100}, DivisibilityError),
            ({"modalities": ["T1", "T1"]}, ConfigError),
            ({"modalities": ["FLAIR"]}, ConfigError),
            ({"modalities": []}, ConfigError),
            ({"modalities": ["PD"]}, ConfigError),
            ({"epochs": 0}, ConfigError),
            ({"keep_count": 0}, ConfigError),
        ):
            with self.subTest(**{k: str(v) for k, v in data.items()}), self.assertRaises(error):
                CliConfig.from_mapping(data)

    def test_seed_fallback(self):
        self.assertEqual(CliConfig.from_mapping({}, seed_fallback=9).seed, 9)
        self.assertEqual(CliConfig.from_mapping({"seed": 4}, seed_fallback=9).seed, 4)
        with patch.dict(os.environ, {"MODSYNTH_SEED": "13"}):
            self.assertEqual(CliConfig.from_mapping({}).seed, 13)

    def test_manifest_relative_to_config_file(self):
        path = self.dir / "configs" / "run.yaml"
        path.parent.mkdir()
        path.write_text("data_manifest: ../data/manifest.csv\nepochs: 3\n", encoding="utf-8")
        config = CliConfig.from_file(path)
        self.assertEqual(Path(config.data_manifest), (self.dir / "data" / "manifest.csv").resolve())
        self.assertEqual(config.epochs, 3)

    def test_bad_files(self):
        missing = self.dir / "missing.yaml"
        broken = self.dir / "broken.yaml"
        broken.write_text("epochs: [1,\n", encoding="utf-8")
        scalar = self.dir / "scalar.yaml"
        scalar.write_text("42\n", encoding="utf-8")
        for path in (missing, broken, scalar):
            with self.subTest(path=path.name), self.assertRaises(ConfigError):
                CliConfig.from_file(path)

    def test_describe_lists_every_key_with_provenance(self):
        lines = CliConfig.from_mapping({}).describe()
        self.assertEqual(len(lines), len(FIELD_PROVENANCE))
        self.assertIn("epochs: 200  # 200 training epochs", lines)
        self.assertIn("lr: 0.0002  # Adam learning rate, fixed at 0.0002 before linear decay", lines)

    def test_yaml_round_trip(self):
        config = CliConfig.from_mapping({"modalities": ["T1"], "seed": 2})
        path = self.dir / "dump.yaml"
        path.write_text(config.to_yaml(), encoding="utf-8")
        self.assertEqual(CliConfig.from_file(path).with_overrides(data_manifest=config.data_manifest), config)

    def test_with_overrides(self):
        config = CliConfig.from_mapping({})
        self.assertEqual(config.with_overrides(epochs=5).epochs, 5)
        with self.assertRaises(ConfigError):
            config.with_overrides(epoch=5)

    def test_output_dir_resolution(self):
        config = CliConfig.from_mapping({"output_dir": "runs/a"})
        self.assertEqual(config.resolve_output_dir("/data/out"), Path("/data/out/runs/a"))
        absolute = config.with_overrides(output_dir=str(self.dir))
        self.assertEqual(absolute.resolve_output_dir("/data/out"), self.dir)

    def test_shipped_configs_load(self):
        full = CliConfig.from_file(CONFIG_DIR / "full_scale.yaml")
        self.assertEqual((full.epochs, full.image_size, full.width_scale), (200, 256, 1.0))
        desk = CliConfig.from_file(CONFIG_DIR / "desk.yaml")
        self.assertEqual((desk.image_size, desk.width_scale), (64, 0.25))
