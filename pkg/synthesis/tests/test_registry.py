import math
import tempfile
from pathlib import Path
from unittest.mock import MagicMock, patch

from django.test import SimpleTestCase, TestCase, override_settings

from src.services.ablation_service import CeleryRunExecutor, block_size_matrix
from src.services.training_service import TrainingService
from src.training.manifest import EpochRecord, RunManifest
from synthesis.models import EpochSummary, TrainingRun
from synthesis.services import RunRegistryService, _json_safe, safe_float
from synthesis.tasks import train_experiment_run
from synthesis.tests.factories import tiny_config, tiny_phantom


def _manifest(**overrides) -> RunManifest:
    values = dict(
        run_name="desk",
        seed=3,
        train_config={"lr": 2e-4, "lambda1": 0.1},
        generator_config={"modality_count": 2, "image_size": 32},
        modalities={"sources": ["T1", "T2"], "target": "FLAIR"},
        output_dir="/tmp/runs/desk",
    )
    values.update(overrides)
    return RunManifest(**values)


def _record(epoch: int, **overrides) -> EpochRecord:
    values = dict(epoch=epoch, lr=2e-4, loss_d=1.2, loss_g=0.9, loss_l1_synth=0.3, loss_l1_pseudo=0.4, steps=5)
    values.update(overrides)
    return EpochRecord(**values)


class SafeFloatTests(SimpleTestCase):
    def test_conversions(self):
        self.assertEqual(safe_float("1.5"), 1.5)
        self.assertEqual(safe_float(2), 2.0)
        self.assertIsNone(safe_float(None))
        self.assertIsNone(safe_float("abc"))
        self.assertIsNone(safe_float(float("inf")))
        self.assertIsNone(safe_float(float("nan")))
        self.assertEqual(safe_float(float("-inf"), default=0.0), 0.0)

    def test_json_safe_is_recursive(self):
        value = {"psnr": {"mean": float("inf"), "std": 1.0}, "values": [1.0, float("nan"), "x"], "n": 3}
        self.assertEqual(_json_safe(value), {"psnr": {"mean": None, "std": 1.0}, "values": [1.0, None, "x"], "n": 3})


class RunRegistryServiceTests(TestCase):
    def setUp(self):
        self.service = RunRegistryService()
        self.manifest = _manifest()
        self.service.on_run_start(self.manifest)

    def test_run_start(self):
        run = TrainingRun.objects.get()
        self.assertEqual(run.run_name, "desk")
        self.assertEqual(run.status, "running")
        self.assertEqual(run.seed, 3)
        self.assertEqual(run.label, "T1+T2→FLAIR")
        self.assertEqual(run.generator_config["image_size"], 32)

    def test_explicit_label(self):
        RunRegistryService(label="block 32").on_run_start(_manifest(run_name="block_32"))
        self.assertEqual(TrainingRun.objects.get(run_name="block_32").label, "block 32")

    def test_epochs(self):
        self.service.on_epoch_end(self.manifest, _record(1, checkpoint="/tmp/runs/desk/epoch_1.ckpt"))
        self.service.on_epoch_end(self.manifest, _record(2, loss_d=float("nan"), val_psnr=float("inf")))

        run = TrainingRun.objects.get()
        self.assertEqual(run.epochs_completed, 2)
        self.assertEqual(run.final_checkpoint, "/tmp/runs/desk/epoch_1.ckpt")
        epochs = list(run.epochs.all())
        self.assertEqual([e.epoch for e in epochs], [1, 2])
        self.assertEqual(epochs[0].loss_d, 1.2)
        self.assertIsNone(epochs[1].loss_d)
        self.assertIsNone(epochs[1].val_psnr)
        self.assertEqual(epochs[1].checkpoint, "")

    def test_repeated_epoch_updates_in_place(self):
        self.service.on_epoch_end(self.manifest, _record(1))
        self.service.on_epoch_end(self.manifest, _record(1, loss_g=0.5))
        self.assertEqual(EpochSummary.objects.count(), 1)
        self.assertEqual(EpochSummary.objects.get().loss_g, 0.5)

    def test_events(self):
        event = self.manifest.add_event("skipped_step", epoch=1, step=4, loss=float("nan"))
        self.service.on_event(self.manifest, event)
        events = TrainingRun.objects.get().events
        self.assertEqual(len(events), 1)
        self.assertEqual(events[0]["kind"], "skipped_step")
        self.assertIsNone(events[0]["loss"])

    def test_run_end(self):
        self.manifest.test_metrics = {
            "psnr": {"mean": 24.5, "std": 1.2},
            "ssim": {"mean": 0.81, "std": 0.02},
            "nrmse": {"mean": float("inf"), "std": 0.0},
        }
        self.manifest.finish("completed")
        self.service.on_run_end(self.manifest)

        run = TrainingRun.objects.get()
        self.assertEqual(run.status, "completed")
        self.assertIsNotNone(run.finished_at)
        self.assertEqual(run.test_psnr_mean, 24.5)
        self.assertEqual(run.test_ssim_mean, 0.81)
        self.assertIsNone(run.test_nrmse_mean)
        self.assertIsNone(run.test_metrics["nrmse"]["mean"])

    def test_failed_run_without_metrics(self):
        self.manifest.finish("failed")
        self.service.on_run_end(self.manifest)
        run = TrainingRun.objects.get()
        self.assertEqual(run.status, "failed")
        self.assertIsNone(run.test_metrics)
        self.assertIsNone(run.test_psnr_mean)

    def test_runs_with_same_name_are_kept_apart(self):
        other = _manifest(started_at="2026-01-01T00:00:00+00:00")
        self.service.on_run_start(other)
        self.service.on_epoch_end(other, _record(1))
        runs = TrainingRun.objects.filter(run_name="desk")
        self.assertEqual(runs.count(), 2)
        self.assertEqual(sorted(r.epochs.count() for r in runs), [0, 1])

    def test_run_history(self):
        for index in range(3):
            RunRegistryService().on_run_start(_manifest(run_name=f"run_{index}"))
        history = self.service.get_run_history(limit=2)
        self.assertEqual(len(history), 2)
        self.assertEqual(len(self.service.get_run_history()), 4)
        self.assertIn("running", str(history[0]))


class RegistryTrainingTests(TestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls._tmp.name)
        tiny_phantom(cls.root / "phantom", subjects=4)
        cls.manifest = cls.root / "phantom" / "manifest.csv"

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()
        super().tearDownClass()

    def test_training_run_is_recorded(self):
        config = tiny_config(self.manifest, self.root / "runs" / "recorded", epochs=2)
        service = TrainingService(self.root / "runs", observers=[RunRegistryService(label=config.label)])
        result, _ = service.run(config)

        run = TrainingRun.objects.get()
        self.assertEqual(run.status, "completed")
        self.assertEqual(run.epochs_completed, 2)
        self.assertEqual(run.epochs.count(), 2)
        self.assertEqual(run.final_checkpoint, str(result.final_checkpoint))
        self.assertTrue(math.isfinite(run.test_psnr_mean))
        self.assertEqual([e.lr for e in run.epochs.all()], [2e-4, 0.0])

    @override_settings(MODSYNTH_REGISTRY_ENABLED=True)
    def test_task_runs_eagerly(self):
        base = tiny_config(self.manifest, self.root / "unused")
        payload = block_size_matrix(base, [32], self.root / "experiments" / "eager").payloads()[0]

        with patch("celery.app.task.Task.update_state") as update_state:
            result = train_experiment_run.apply(args=(payload,)).get()

        update_state.assert_called_once_with(
            state="PROGRESS", meta={"matrix": "block_size_sweep", "run": "block_32", "stage": "training"}
        )
        self.assertEqual(result["run"], "block_32")
        self.assertTrue(Path(result["metrics_csv"]).exists())
        self.assertTrue(Path(result["panel"]).exists())
        run = TrainingRun.objects.get()
        self.assertEqual(run.run_name, "block_32")
        self.assertEqual(run.label, "32x32 (no chunking)")
        self.assertEqual(run.status, "completed")


class CeleryRunExecutorTests(SimpleTestCase):
    def test_fans_out_one_signature_per_payload(self):
        task = MagicMock()
        task.s.side_effect = lambda payload: ("signature", payload["run"])
        payloads = [{"run": "block_32"}, {"run": "block_16"}]

        with patch("celery.group") as group:
            group.return_value.apply_async.return_value.get.return_value = [{"run": "block_32"}, {"run": "block_16"}]
            results = CeleryRunExecutor(task, timeout=30).run_all(payloads)
            signatures = list(group.call_args.args[0])

        self.assertEqual(signatures, [("signature", "block_32"), ("signature", "block_16")])
        group.return_value.apply_async.return_value.get.assert_called_once_with(timeout=30, disable_sync_subtasks=False)
        self.assertEqual([r["run"] for r in results], ["block_32", "block_16"])
