"""
Database services for the run registry.

RunRegistryService is a run observer: hand it to the trainer (directly or via
TrainingService) and every epoch lands in the database as it finishes.
"""

import logging
import math
from typing import Any, Dict, List, Optional

from django.db import transaction
from django.utils import timezone

from src.interfaces.run_observer import IRunObserver
from synthesis.models import EpochSummary, TrainingRun

logger = logging.getLogger(__name__)


def safe_float(value, default=None) -> Optional[float]:
    """Convert value to float, mapping infinity, NaN and invalid values to ``default``."""
    if value is None:
        return default
    try:
        f = float(value)
    except (ValueError, TypeError):
        return default
    if math.isinf(f) or math.isnan(f):
        return default
    return f


def _json_safe(value: Any) -> Any:
    """JSONField cannot store NaN/inf; replace them with None recursively."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float):
        return safe_float(value)
    return value


class RunRegistryService(IRunObserver):
    """Persists run lifecycle events to TrainingRun / EpochSummary."""

    def __init__(self, label: str = ''):
        self._label = label
        self._runs: Dict[str, TrainingRun] = {}

    def _run_for(self, manifest) -> TrainingRun:
        key = f"{manifest.run_name}@{manifest.started_at}"
        return self._runs[key]

    def on_run_start(self, manifest) -> None:
        modalities = manifest.modalities or {}
        label = self._label
        if not label and modalities.get('sources'):
            label = f"{'+'.join(modalities['sources'])}→{modalities.get('target', '')}"
        run = TrainingRun.objects.create(
            run_name=manifest.run_name,
            output_dir=manifest.output_dir,
            label=label,
            seed=manifest.seed,
            train_config=_json_safe(manifest.train_config),
            generator_config=_json_safe(manifest.generator_config),
            modalities=_json_safe(modalities),
        )
        self._runs[f"{manifest.run_name}@{manifest.started_at}"] = run
        logger.info(f"Registered run {run.pk} ({run.run_name})")

    def on_epoch_end(self, manifest, record) -> None:
        run = self._run_for(manifest)
        with transaction.atomic():
            EpochSummary.objects.update_or_create(
                run=run,
                epoch=record.epoch,
                defaults={
                    'lr': record.lr,
                    'loss_d': safe_float(record.loss_d),
                    'loss_g': safe_float(record.loss_g),
                    'loss_l1_synth': safe_float(record.loss_l1_synth),
                    'loss_l1_pseudo': safe_float(record.loss_l1_pseudo),
                    'steps': record.steps,
                    'skipped_steps': record.skipped_steps,
                    'seconds': record.seconds,
                    'val_psnr': safe_float(record.val_psnr),
                    'val_ssim': safe_float(record.val_ssim),
                    'val_nrmse': safe_float(record.val_nrmse),
                    'checkpoint': record.checkpoint or '',
                },
            )
            run.epochs_completed = record.epoch
            if record.checkpoint:
                run.final_checkpoint = record.checkpoint
            run.save(update_fields=['epochs_completed', 'final_checkpoint'])

    def on_event(self, manifest, event: Dict[str, Any]) -> None:
        run = self._run_for(manifest)
        run.events = list(run.events) + [_json_safe(event)]
        run.save(update_fields=['events'])

    def on_run_end(self, manifest) -> None:
        run = self._run_for(manifest)
        run.status = manifest.status
        run.finished_at = timezone.now()
        test = manifest.test_metrics or {}
        run.test_metrics = _json_safe(test) if test else None
        run.test_psnr_mean = safe_float(test.get('psnr', {}).get('mean'))
        run.test_ssim_mean = safe_float(test.get('ssim', {}).get('mean'))
        run.test_nrmse_mean = safe_float(test.get('nrmse', {}).get('mean'))
        run.save()
        logger.info(f"Run {run.pk} finished with status {run.status}")

    def get_run_history(self, limit: int = 10) -> List[TrainingRun]:
        return list(TrainingRun.objects.all()[:limit])
