import tempfile
from pathlib import Path
from unittest.mock import MagicMock

import numpy as np
import pandas as pd
from django.conf import settings
from django.test import SimpleTestCase
from scipy import stats

from src.config import CliConfig
from src.exceptions import ExperimentError
from src.exporters import CsvExporter
from src.metrics import MetricReport
from src.services.ablation_service import (
    NOT_REPRODUCED,
    AblationService,
    ExperimentMatrix,
    InlineRunExecutor,
    RunSpec,
    block_size_matrix,
    block_size_trend,
    compare_methods,
    default_block_sizes,
    modality_matrix,
)
from synthesis.tests.factories import tiny_config, tiny_phantom

CONFIG_DIR = Path(settings.BASE_DIR) / "configs"


def _report(label, offset=0.0, seed=0, count=30):
    rng = np.random.default_rng(seed)
    report = MetricReport(label=label)
    for i in range(count):
        report.add(
            f"s{i // 10}",
            i % 10,
            24.0 + offset + rng.normal(0, 0.3),
            0.85 + offset / 100 + rng.normal(0, 0.003),
            0.25 - offset / 10 + rng.normal(0, 0.01),
        )
    return report


class MatrixTests(SimpleTestCase):
    def setUp(self):
        self.base = CliConfig.from_mapping({"image_size": 64, "laf_block_size": 32, "width_scale": 0.25})
        self.out = Path("/tmp/experiments/test")

    def test_default_block_sizes(self):
        self.assertEqual(default_block_sizes(256), [256, 128, 64, 32, 16])
        self.assertEqual(default_block_sizes(64), [64, 32, 16, 8, 4])

    def test_block_size_matrix(self):
        matrix = block_size_matrix(self.base, None, self.out)
        self.assertEqual([r.name for r in matrix.runs], ["block_64", "block_32", "block_16", "block_8", "block_4"])
        self.assertEqual(matrix.runs[0].label, "64x64 (no chunking)")
        self.assertEqual(matrix.swept_keys, ["laf_block_size"])
        config = matrix.run_config(matrix.runs[2])
        self.assertEqual((config.laf_block_size, config.output_dir), (16, str(self.out / "block_16")))
        self.assertEqual(config.seed, self.base.seed)

    def test_invalid_block_size_rejected(self):
        with self.assertRaisesMessage(ExperimentError, "[48]"):
            block_size_matrix(self.base, [64, 48], self.out)

    def test_modality_matrix_labels(self):
        matrix = modality_matrix(self.base, None, self.out)
        self.assertEqual([r.label for r in matrix.runs], ["T1→FLAIR", "T1+T2→FLAIR", "T1+T2+T1c→FLAIR"])
        configs = [matrix.run_config(r) for r in matrix.runs]
        for previous, current in zip(configs, configs[1:]):
            self.assertEqual(current.modalities[:-1], previous.modalities)

    def test_modality_matrix_adds_one_at_a_time(self):
        with self.assertRaises(ExperimentError):
            modality_matrix(self.base, [["T1"], ["T1", "T2", "T1c"]], self.out)
        with self.assertRaises(ExperimentError):
            modality_matrix(self.base, [["T1"], ["T2", "T1c"]], self.out)

    def test_validation(self):
        cases = (
            [],
            [RunSpec("a", {"seed": 1}), RunSpec("b", {"seed": 2})],
            [RunSpec("a", {"lr": 1e-4}), RunSpec("a", {"lr": 2e-4})],
            [RunSpec("a", {"lr": 1e-4}), RunSpec("b", {"epochs": 3})],
            [RunSpec("a", {"laf_block_size": 48})],
        )
        for runs in cases:
            with self.subTest(runs=[r.name for r in runs]), self.assertRaises(ExperimentError):
                ExperimentMatrix("m", self.base, runs, self.out).validate()

    def test_runs_varying_two_keys_rejected(self):
        runs = [
            RunSpec("a", {"laf_block_size": 32, "lr": 1e-4}),
            RunSpec("b", {"laf_block_size": 16, "lr": 2e-4}),
        ]
        with self.assertRaisesMessage(ExperimentError, "['laf_block_size', 'lr'] together"):
            ExperimentMatrix("m", self.base, runs, self.out).validate()

    def test_constant_extra_override_allowed(self):
        runs = [
            RunSpec("a", {"laf_block_size": 32, "lr": 1e-4}),
            RunSpec("b", {"laf_block_size": 16, "lr": 1e-4}),
        ]
        matrix = ExperimentMatrix("m", self.base, runs, self.out).validate()
        self.assertEqual(matrix.varying_keys, ["laf_block_size"])
        self.assertEqual(modality_matrix(self.base, None, self.out).varying_keys, ["modalities"])

    def test_payloads_are_plain_dicts(self):
        payloads = block_size_matrix(self.base, [64, 32], self.out).payloads()
        self.assertEqual([p["run"] for p in payloads], ["block_64", "block_32"])
        self.assertEqual(CliConfig.from_dict(payloads[1]["config"]).laf_block_size, 32)

    def test_shipped_matrix_files(self):
        block = ExperimentMatrix.from_file(CONFIG_DIR / "block_sweep.yaml", output_root="/tmp/out")
        self.assertEqual(block.kind, "block_size")
        self.assertEqual([r.overrides["laf_block_size"] for r in block.runs], [64, 32, 16, 8, 4])
        self.assertEqual(block.output_dir, Path("/tmp/out/experiments/block_size_sweep"))
        modality = ExperimentMatrix.from_file(CONFIG_DIR / "modality_sweep.yaml", output_root="/tmp/out")
        self.assertEqual(len(modality.runs), 3)

    def test_matrix_file_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "m.yaml"
            for text in (
                "sweep: {lr: [1, 2]}\nruns: [{name: a}]\n",
                "sweep: {lr: [0.1], epochs: [2]}\n",
                "sweeps: {lr: [0.1]}\n",
                "sweep: {laf_block_size: [100]}\n",
            ):
                path.write_text(text, encoding="utf-8")
                with self.subTest(text=text), self.assertRaises(ExperimentError):
                    ExperimentMatrix.from_file(path, output_root=tmp)

    def test_explicit_runs(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "m.yaml"
            path.write_text(
                "name: lambdas\nbase_config: {image_size: 64, laf_block_size: 32}\n"
                "runs:\n  - {name: low, overrides: {lambda1: 0.05}}\n  - {name: high, overrides: {lambda1: 0.2}}\n",
                encoding="utf-8",
            )
            matrix = ExperimentMatrix.from_file(path, output_root=tmp)
        self.assertEqual((matrix.name, matrix.kind), ("lambdas", "custom"))
        self.assertEqual([matrix.run_config(r).lambda1 for r in matrix.runs], [0.05, 0.2])


class CompareMethodsTests(SimpleTestCase):
    def test_report_against_itself(self):
        report = _report("a")
        summary = compare_methods(report, report, "a", "a")
        for metric in summary.metrics:
            self.assertEqual(metric.pvalue, 1.0)
            self.assertFalse(metric.significant)
            self.assertIsNone(metric.better)

    def test_offset_matches_reference(self):
        a, b = _report("a", offset=0.5, seed=1), _report("b", seed=2)
        summary = compare_methods(a, b, "ours", "baseline")
        psnr = summary.metrics[0]
        reference = stats.ttest_rel(a.psnr, b.psnr)
        self.assertAlmostEqual(psnr.pvalue, float(reference.pvalue), delta=1e-6)
        self.assertAlmostEqual(psnr.statistic, float(reference.statistic), delta=1e-6)
        self.assertEqual(psnr.better, "ours")

    def test_asterisk_marks_better_method(self):
        summary = compare_methods(_report("a", offset=0.5, seed=1), _report("b", seed=2), "ours", "baseline")
        rows = {row["metric"]: row for row in summary.rows()}
        self.assertTrue(rows["psnr"]["ours"].endswith("*"))
        self.assertFalse(rows["psnr"]["baseline"].endswith("*"))
        self.assertTrue(rows["nrmse"]["ours"].endswith("*"))

    def test_slice_order_does_not_matter(self):
        a = _report("a", offset=0.5, seed=1)
        b = _report("b", seed=2)
        shuffled = MetricReport(label="b")
        for i in reversed(range(b.sample_count)):
            shuffled.add(b.subject_ids[i], b.slice_indices[i], b.psnr[i], b.ssim[i], b.nrmse[i])
        first = compare_methods(a, b).metrics[0]
        second = compare_methods(a, shuffled).metrics[0]
        self.assertAlmostEqual(first.pvalue, second.pvalue, places=12)

    def test_mismatched_slices(self):
        with self.assertRaises(ExperimentError):
            compare_methods(_report("a", count=30), _report("b", count=20))


class TrendTests(SimpleTestCase):
    def _rows(self, values):
        return [{"block_size": size, "psnr_mean": value} for size, value in zip((256, 128, 64, 32, 16), values)]

    def test_rise_then_decline(self):
        self.assertIn("peaking at 128x128", block_size_trend(self._rows([20, 24, 23, 22, 21])))

    def test_no_chunking_best(self):
        self.assertIn("highest without chunking", block_size_trend(self._rows([25, 24, 23, 22, 21])))

    def test_too_few(self):
        self.assertIn("Too few", block_size_trend(self._rows([25, 24])))


class AblationServiceTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def _fake_executor(self, offsets):
        def run_all(payloads):
            results = []
            for payload, offset in zip(payloads, offsets):
                path = CsvExporter().export(_report(payload["run"], offset, seed=len(results)),
                                            self.out / payload["run"] / "test_metrics.csv")
                results.append({"run": payload["run"], "label": payload["label"], "metrics_csv": str(path)})
            return results

        executor = MagicMock()
        executor.run_all.side_effect = run_all
        return executor

    def test_modality_sweep_tables(self):
        base = CliConfig.from_mapping({"image_size": 64, "laf_block_size": 32})
        executor = self._fake_executor([0.0, 0.5, 0.6])
        result = AblationService(executor).run_modality_sweep(base, output_dir=self.out)

        executor.run_all.assert_called_once()
        self.assertEqual([row["label"] for row in result.rows], ["T1→FLAIR", "T1+T2→FLAIR", "T1+T2+T1c→FLAIR"])
        for key in ("csv", "markdown", "plot", "significance"):
            self.assertTrue(result.files[key].exists(), key)
        table = result.files["markdown"].read_text(encoding="utf-8")
        self.assertIn("24.8 ± 1.85", table)
        self.assertIn(NOT_REPRODUCED, table)
        self.assertEqual(len(result.comparisons), 2)
        frame = pd.read_csv(result.files["csv"])
        self.assertEqual(list(frame["slices"]), [30, 30, 30])

    def test_block_sweep_reports_trend(self):
        base = CliConfig.from_mapping({"image_size": 64, "laf_block_size": 32})
        result = AblationService(self._fake_executor([0.0, 1.0, 0.5])).run_block_size_sweep(
            base, [64, 32, 16], output_dir=self.out
        )
        self.assertEqual([row["block_size"] for row in result.rows], [64, 32, 16])
        self.assertIn("peaking at 32x32", result.notes[0])

    def test_missing_metrics_is_an_error(self):
        executor = MagicMock()
        executor.run_all.return_value = [{"run": "block_64", "metrics_csv": None}]
        base = CliConfig.from_mapping({"image_size": 64, "laf_block_size": 32})
        with self.assertRaises(ExperimentError):
            AblationService(executor).run_block_size_sweep(base, [64], output_dir=self.out)


class InlineMatrixTests(SimpleTestCase):
    """Two tiny block-size runs trained for real, repeated to check reproducibility."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        tiny_phantom(cls.root / "phantom", subjects=4)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def _run(self, name):
        base = tiny_config(self.root / "phantom" / "manifest.csv", self.root / "unused")
        service = AblationService(InlineRunExecutor())
        return service.run_block_size_sweep(base, [32, 16], output_dir=self.root / name)

    def test_matrix_runs_and_repeats_identically(self):
        first = self._run("first")
        second = self._run("second")
        self.assertEqual(len(first.rows), 2)
        self.assertTrue((self.root / "first" / "block_32" / "comparison.png").exists())
        self.assertTrue((self.root / "first" / "metrics.png").exists())
        columns = ["run", "slices", "psnr_mean", "psnr_std", "ssim_mean", "ssim_std", "nrmse_mean", "nrmse_std"]
        pd.testing.assert_frame_equal(
            pd.read_csv(first.files["csv"])[columns], pd.read_csv(second.files["csv"])[columns]
        )
