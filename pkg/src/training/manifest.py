"""
Run manifest: config snapshot, seed, per-epoch history, events and
checkpoint paths. Persisted as ``manifest.jsonl`` (one JSON record per
line, appended as the run progresses) plus a final ``summary.json``.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dataclasses_json import dataclass_json

from src.exceptions import ModSynthError
from src.interfaces.run_observer import IRunObserver

logger = logging.getLogger(__name__)

MANIFEST_LOG = "manifest.jsonl"
SUMMARY_FILE = "summary.json"


@dataclass_json
@dataclass
class EpochRecord:
    epoch: int
    lr: float
    loss_d: float
    loss_g: float
    loss_l1_synth: float
    loss_l1_pseudo: float
    steps: int
    skipped_steps: int = 0
    seconds: float = 0.0
    val_psnr: Optional[float] = None
    val_ssim: Optional[float] = None
    val_nrmse: Optional[float] = None
    checkpoint: Optional[str] = None


@dataclass_json
@dataclass
class RunManifest:
    run_name: str
    seed: int
    train_config: Dict[str, Any]
    generator_config: Dict[str, Any]
    modalities: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = ""
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None
    status: str = "running"
    epochs: List[EpochRecord] = field(default_factory=list)
    events: List[Dict[str, Any]] = field(default_factory=list)
    checkpoints: List[str] = field(default_factory=list)
    test_metrics: Optional[Dict[str, Any]] = None

    def add_epoch(self, record: EpochRecord) -> None:
        if self.epochs and record.epoch <= self.epochs[-1].epoch:
            raise ModSynthError(f"Epoch {record.epoch} recorded after epoch {self.epochs[-1].epoch}")
        self.epochs.append(record)
        if record.checkpoint:
            self.checkpoints.append(record.checkpoint)

    def add_event(self, kind: str, **details) -> Dict[str, Any]:
        event = {"kind": kind, "at": datetime.now(timezone.utc).isoformat(), **details}
        self.events.append(event)
        return event

    def finish(self, status: str = "completed") -> None:
        self.status = status
        self.finished_at = datetime.now(timezone.utc).isoformat()

    @property
    def last_epoch(self) -> Optional[EpochRecord]:
        return self.epochs[-1] if self.epochs else None


class ManifestWriter(IRunObserver):
    """Writes the line-delimited manifest log and the final summary file."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.log_path = self.output_dir / MANIFEST_LOG
        self.summary_path = self.output_dir / SUMMARY_FILE

    def _append(self, record: Dict[str, Any]) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def on_run_start(self, manifest: RunManifest) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.log_path.write_text("", encoding="utf-8")
        self._append({
            "type": "run_start",
            "run_name": manifest.run_name,
            "seed": manifest.seed,
            "train_config": manifest.train_config,
            "generator_config": manifest.generator_config,
            "modalities": manifest.modalities,
            "started_at": manifest.started_at,
        })

    def on_epoch_end(self, manifest: RunManifest, record: EpochRecord) -> None:
        self._append({"type": "epoch", **record.to_dict()})

    def on_event(self, manifest: RunManifest, event: Dict[str, Any]) -> None:
        self._append({"type": "event", **event})

    def on_run_end(self, manifest: RunManifest) -> None:
        self._append({"type": "run_end", "status": manifest.status, "finished_at": manifest.finished_at})
        self.summary_path.write_text(manifest.to_json(indent=2, sort_keys=True), encoding="utf-8")
        logger.info("Run summary written to %s", self.summary_path)


def read_manifest_log(path: Union[str, Path]) -> List[Dict[str, Any]]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_LOG
    with path.open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
