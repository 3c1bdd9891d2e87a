import logging
import re
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.data.volume_io import read_slice, read_unit_slice
from src.exceptions import MetricError
from src.exporters.csv_exporter import CsvExporter
from src.exporters.markdown_exporter import MarkdownExporter
from src.metrics.image_quality import slice_metrics
from src.metrics.report import METRICS, MetricReport

logger = logging.getLogger(__name__)

SLICE_SUFFIXES = (".png", ".nii", ".nii.gz")
_SLICE_NAME = re.compile(r"^(?P<subject>.+?)_(?P<index>\d+)$")


def _stem(path: Path) -> str:
    name = path.name
    for suffix in SLICE_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def slice_key(relative: Path) -> Tuple[str, int]:
    """``sub/phantom_003_0041.png`` -> (``sub/phantom_003``, 41); bare ``0041.png`` uses its folder."""
    stem = _stem(relative)
    parent = relative.parent.as_posix()
    prefix = "" if parent == "." else f"{parent}/"
    if stem.isdigit():
        return parent, int(stem)
    match = _SLICE_NAME.match(stem)
    if match:
        return prefix + match.group("subject"), int(match.group("index"))
    return prefix + stem, 0


def index_slices(directory: Union[str, Path]) -> Dict[str, Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise MetricError(f"Not a directory: {directory}")
    return {
        p.relative_to(directory).as_posix(): p
        for p in sorted(directory.rglob("*"))
        if p.is_file() and p.name.endswith(SLICE_SUFFIXES)
    }


def load_pair(pred_path: Path, gt_path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """Both images in [0, 1]: PNGs by bit depth, anything else by the real image's peak."""
    if pred_path.suffix == ".png" and gt_path.suffix == ".png":
        return read_unit_slice(gt_path), read_unit_slice(pred_path)
    real, synth = read_slice(gt_path), read_slice(pred_path)
    peak = float(np.max(real)) or 1.0
    return np.clip(real / peak, 0.0, 1.0), np.clip(synth / peak, 0.0, 1.0)


class EvaluationService:
    """Scores a directory of synthesized slices against ground truth, pairing files by relative path."""

    def __init__(self, csv_exporter: Optional[CsvExporter] = None, markdown_exporter: Optional[MarkdownExporter] = None):
        self._csv_exporter = csv_exporter or CsvExporter()
        self._markdown_exporter = markdown_exporter or MarkdownExporter()

    def evaluate_directories(
        self,
        pred_dir: Union[str, Path],
        gt_dir: Union[str, Path],
        windowed_ssim: bool = False,
    ) -> MetricReport:
        predictions, truths = index_slices(pred_dir), index_slices(gt_dir)
        missing_pred = sorted(set(truths) - set(predictions))
        missing_gt = sorted(set(predictions) - set(truths))
        if missing_pred or missing_gt:
            lines = [f"missing prediction: {name}" for name in missing_pred]
            lines += [f"missing ground truth: {name}" for name in missing_gt]
            raise MetricError("Unpaired slice files:\n  " + "\n  ".join(lines))
        if not truths:
            raise MetricError(f"No slice files found in {gt_dir}")

        report = MetricReport(label=Path(pred_dir).name)
        for name in sorted(truths):
            real, synth = load_pair(predictions[name], truths[name])
            if real.shape != synth.shape:
                raise MetricError(f"{name}: prediction {synth.shape} vs ground truth {real.shape}")
            subject_id, slice_index = slice_key(Path(name))
            report.add(subject_id, slice_index, *slice_metrics(real, synth, windowed_ssim))
        logger.info("Evaluated %d slice pairs", report.sample_count)
        return report.sorted()

    def write_report(
        self,
        report: MetricReport,
        csv_path: Union[str, Path],
        markdown_path: Optional[Union[str, Path]] = None,
    ) -> Dict[str, Path]:
        written = {"csv": self._csv_exporter.export(report, Path(csv_path))}
        if markdown_path:
            row = {"slices": report.sample_count}
            row.update({metric.upper(): report.aggregate(metric).format() for metric in METRICS})
            written["markdown"] = self._markdown_exporter.export(
                [row], Path(markdown_path), title=f"Metrics: {report.label}"
            )
        return written
