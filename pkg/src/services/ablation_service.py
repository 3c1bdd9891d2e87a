"""
Experiment matrices: single-variable sweeps over the LAF block size or the
set of input modalities, plus paired significance comparison of two runs.

Each run trains from the same base config and seed, is scored on the same
test cohort, and contributes one row to the matrix table. Published trends are
reported next to the table, never asserted.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import torch
import yaml

from src.config import CliConfig
from src.data.models import Modality, synthesis_label
from src.exceptions import ExperimentError, ModSynthError
from src.exporters.csv_exporter import CsvExporter, read_report_csv
from src.exporters.markdown_exporter import MarkdownExporter
from src.exporters.plot_exporter import PlotExporter
from src.interfaces.run_executor import IRunExecutor
from src.interfaces.run_observer import IRunObserver
from src.metrics.image_quality import to_unit_range
from src.metrics.report import METRICS, MetricReport
from src.metrics.statistics import SIGNIFICANCE_LEVEL, paired_t_test
from src.services.training_service import TEST_METRICS_FILE, TrainingService

logger = logging.getLogger(__name__)

BLOCK_SIZE_DIVISORS = (1, 2, 4, 8, 16)
DEFAULT_MODALITY_INPUTS = (("T1",), ("T1", "T2"), ("T1", "T2", "T1c"))
HIGHER_IS_BETTER = {"psnr": True, "ssim": True, "nrmse": False}
NOT_REPRODUCED = "not reproduced at desk scale"

# Full-scale (BRATS2015, 200 epochs) results for the modality sweep, mean ± std.
REFERENCE_MODALITY_RESULTS = {
    "T1→FLAIR": {"psnr": "23.7 ± 2.16", "ssim": "0.86 ± 0.02", "nrmse": "0.30 ± 0.11"},
    "T1+T2→FLAIR": {"psnr": "24.8 ± 1.85", "ssim": "0.88 ± 0.02", "nrmse": "0.25 ± 0.09"},
    "T1+T2+T1c→FLAIR": {"psnr": "24.93 ± 1.96", "ssim": "0.87 ± 0.02", "nrmse": "0.24 ± 0.11"},
}

TABLE_CSV = "table.csv"
TABLE_MARKDOWN = "table.md"
PLOT_FILE = "metrics.png"
PANEL_FILE = "comparison.png"
SIGNIFICANCE_MARKDOWN = "significance.md"


@dataclass
class RunSpec:
    name: str
    overrides: Dict[str, Any]
    label: str = ""


@dataclass
class ExperimentMatrix:
    """Named runs, each a set of config overrides on one shared base config."""

    name: str
    base: CliConfig
    runs: List[RunSpec]
    output_dir: Path
    kind: str = "custom"

    def run_config(self, run: RunSpec) -> CliConfig:
        return self.base.with_overrides(**run.overrides, output_dir=str(self.output_dir / run.name))

    @property
    def swept_keys(self) -> List[str]:
        return sorted({key for run in self.runs for key in run.overrides})

    @property
    def varying_keys(self) -> List[str]:
        """Override keys that take more than one distinct value across the runs."""
        return [
            key for key in self.swept_keys
            if len({json.dumps(run.overrides[key], sort_keys=True, default=str) for run in self.runs}) > 1
        ]

    def validate(self) -> "ExperimentMatrix":
        """Pre-flight: every run config is valid and runs differ only in the swept keys."""
        if not self.runs:
            raise ExperimentError(f"Matrix {self.name!r} has no runs")
        names = [run.name for run in self.runs]
        if len(set(names)) != len(names):
            raise ExperimentError(f"Matrix {self.name!r} has duplicate run names")
        key_sets = {tuple(sorted(run.overrides)) for run in self.runs}
        if len(key_sets) != 1:
            raise ExperimentError(f"Matrix {self.name!r}: runs override different keys {sorted(key_sets)}")
        if len(self.varying_keys) > 1:
            raise ExperimentError(
                f"Matrix {self.name!r} varies {self.varying_keys} together; runs may differ in one variable only"
            )
        forbidden = {"seed", "output_dir", "data_manifest", "train_subjects"} & set(self.swept_keys)
        if forbidden:
            raise ExperimentError(f"Matrix {self.name!r} may not vary {sorted(forbidden)}")
        for run in self.runs:
            try:
                self.run_config(run)
            except ModSynthError as e:
                raise ExperimentError(f"Run {run.name!r} of matrix {self.name!r} is invalid: {e}") from e
        return self

    def payloads(self) -> List[Dict[str, Any]]:
        return [
            {
                "matrix": self.name,
                "run": run.name,
                "label": run.label or run.name,
                "config": self.run_config(run).to_dict(),
            }
            for run in self.runs
        ]

    @classmethod
    def from_file(cls, path: Union[str, Path], output_root: Union[str, Path], seed_fallback: Optional[int] = None
                  ) -> "ExperimentMatrix":
        """
        Matrix YAML::

            name: block_sweep
            base_config: desk.yaml          # path (relative to this file) or inline mapping
            sweep:
              laf_block_size: [64, 32, 16]  # or  modalities: [[T1], [T1, T2]]
            # or explicit runs:  runs: [{name: a, overrides: {...}}, ...]
        """
        path = Path(path)
        if not path.exists():
            raise ExperimentError(f"Matrix config not found: {path}")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        unknown = set(data) - {"name", "base_config", "sweep", "runs", "output_dir"}
        if unknown:
            raise ExperimentError(f"{path}: unknown matrix keys {sorted(unknown)}")

        base_ref = data.get("base_config", {})
        if isinstance(base_ref, str):
            base = CliConfig.from_file(path.parent / base_ref, seed_fallback)
        else:
            base = CliConfig.from_mapping(base_ref, seed_fallback)

        name = data.get("name") or path.stem
        out = Path(data.get("output_dir") or Path(output_root) / "experiments" / name)
        sweep, explicit = data.get("sweep"), data.get("runs")
        if bool(sweep) == bool(explicit):
            raise ExperimentError(f"{path}: give exactly one of 'sweep' or 'runs'")

        if explicit:
            runs = [RunSpec(name=r["name"], overrides=dict(r.get("overrides", {}))) for r in explicit]
            return cls(name, base, runs, out).validate()
        if len(sweep) != 1:
            raise ExperimentError(f"{path}: a sweep varies exactly one key, got {sorted(sweep)}")
        (key, values), = sweep.items()
        if key == "laf_block_size":
            return block_size_matrix(base, values, out, name)
        if key == "modalities":
            return modality_matrix(base, values, out, name)
        runs = [RunSpec(name=f"{key}_{value}", overrides={key: value}) for value in values]
        return cls(name, base, runs, out).validate()


def default_block_sizes(image_size: int) -> List[int]:
    return sorted({image_size // d for d in BLOCK_SIZE_DIVISORS if image_size // d >= 1}, reverse=True)


def block_size_matrix(
    base: CliConfig,
    sizes: Optional[Sequence[int]],
    output_dir: Path,
    name: str = "block_size_sweep",
) -> ExperimentMatrix:
    sizes = list(sizes) if sizes else default_block_sizes(base.image_size)
    bad = [s for s in sizes if s < 1 or base.image_size % s]
    if bad:
        raise ExperimentError(f"Block sizes {bad} do not divide image_size {base.image_size}")
    if base.image_size not in sizes:
        logger.warning("Block-size sweep has no no-chunking benchmark (block = %d)", base.image_size)
    runs = [
        RunSpec(
            name=f"block_{size}",
            overrides={"laf_block_size": int(size)},
            label=f"{size}x{size}" + (" (no chunking)" if size == base.image_size else ""),
        )
        for size in sizes
    ]
    return ExperimentMatrix(name, base, runs, Path(output_dir), kind="block_size").validate()


def modality_matrix(
    base: CliConfig,
    inputs: Optional[Sequence[Sequence[str]]],
    output_dir: Path,
    name: str = "modality_sweep",
    target: Optional[str] = None,
) -> ExperimentMatrix:
    inputs = [list(group) for group in (inputs or DEFAULT_MODALITY_INPUTS)]
    parsed = [Modality.parse_many(group) for group in inputs]
    for previous, current in zip(parsed, parsed[1:]):
        if len(current) != len(previous) + 1 or current[: len(previous)] != previous:
            raise ExperimentError(
                f"Modality sweep must add exactly one modality per run: {list(previous)} -> {list(current)}"
            )
    target = target or base.target
    runs = []
    for group in parsed:
        label = synthesis_label(group, Modality.parse(target))
        runs.append(RunSpec(
            name="_".join(m.value for m in group),
            overrides={"modalities": [m.value for m in group], "target": target},
            label=label,
        ))
    return ExperimentMatrix(name, base, runs, Path(output_dir), kind="modality").validate()


def execute_run(payload: Dict[str, Any], observers: Sequence[IRunObserver] = ()) -> Dict[str, Any]:
    """Train and score one matrix run; the result dict is JSON-serializable."""
    config = CliConfig.from_dict(payload["config"])
    output_dir = Path(config.output_dir)
    service = TrainingService(output_root=output_dir.parent, observers=observers)
    data = service.prepare_data(config)
    result, output_dir = service.run(config, run_name=payload["run"], output_dir=output_dir, data=data)

    panel = None
    if data.test is not None:
        panel = str(write_comparison_panel(result.generator, data.test, output_dir / PANEL_FILE, payload["label"]))
    return {
        "matrix": payload["matrix"],
        "run": payload["run"],
        "label": payload["label"],
        "output_dir": str(output_dir),
        "metrics_csv": str(output_dir / TEST_METRICS_FILE) if result.test_report else None,
        "summary": result.manifest.test_metrics,
        "panel": panel,
    }


@torch.no_grad()
def write_comparison_panel(generator, dataset, output_path: Path, title: str) -> Path:
    """Sources, pseudo-target, synthesized and real target for the middle test slice."""
    sample = dataset.sample(len(dataset) // 2)
    generator.eval()
    dtype = next(generator.parameters()).dtype
    device = next(generator.parameters()).device
    sources = torch.as_tensor(sample.sources[None], dtype=dtype, device=device)
    synthesized, pseudo = generator(sources)
    images = {m.value: to_unit_range(sample.sources[k]) for k, m in enumerate(sample.source_modalities)}
    images["pseudo-target"] = to_unit_range(pseudo[0, 0].cpu().numpy())
    images["synthesized"] = to_unit_range(synthesized[0, 0].cpu().numpy())
    images[f"real {sample.target_modality.value}"] = to_unit_range(sample.target)
    return PlotExporter().comparison_panel(images, output_path, f"{title} ({sample.subject_id}, slice {sample.slice_index})")


class InlineRunExecutor(IRunExecutor):
    """Runs matrix entries sequentially in this process."""

    def __init__(self, observers: Sequence[IRunObserver] = ()):
        self._observers = list(observers)

    def run_all(self, payloads: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        return [execute_run(payload, self._observers) for payload in payloads]


class CeleryRunExecutor(IRunExecutor):
    """Fans runs out as a Celery group of ``task`` signatures and waits for all of them."""

    def __init__(self, task, timeout: Optional[float] = None):
        self._task = task
        self._timeout = timeout

    def run_all(self, payloads: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        from celery import group

        async_result = group(self._task.s(payload) for payload in payloads).apply_async()
        return async_result.get(timeout=self._timeout, disable_sync_subtasks=False)


@dataclass
class MetricComparison:
    metric: str
    mean_a: float
    mean_b: float
    statistic: float
    pvalue: float
    significant: bool
    better: Optional[str]


@dataclass
class ComparisonSummary:
    label_a: str
    label_b: str
    count: int
    metrics: List[MetricComparison] = field(default_factory=list)

    def rows_long(self) -> List[Dict[str, Any]]:
        """Label-independent columns, for stacking several comparisons in one table."""
        return [
            {
                "comparison": f"{self.label_a} vs {self.label_b}",
                "metric": m.metric,
                "mean_a": f"{m.mean_a:.4f}" + ("*" if m.better == self.label_a else ""),
                "mean_b": f"{m.mean_b:.4f}" + ("*" if m.better == self.label_b else ""),
                "t": m.statistic,
                "p": m.pvalue,
            }
            for m in self.metrics
        ]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "metric": m.metric,
                self.label_a: f"{m.mean_a:.4f}" + ("*" if m.better == self.label_a else ""),
                self.label_b: f"{m.mean_b:.4f}" + ("*" if m.better == self.label_b else ""),
                "t": m.statistic,
                "p": m.pvalue,
                "significant": m.significant,
            }
            for m in self.metrics
        ]


def compare_methods(
    report_a: MetricReport,
    report_b: MetricReport,
    label_a: str = "A",
    label_b: str = "B",
) -> ComparisonSummary:
    """
    Paired t-test per metric over identical slice sets. The better method's
    mean is starred when p < 0.05.
    """
    keys_a, keys_b = report_a.keys(), report_b.keys()
    if sorted(keys_a) != sorted(keys_b) or len(set(keys_a)) != len(keys_a):
        only_a = sorted(set(keys_a) - set(keys_b))[:5]
        only_b = sorted(set(keys_b) - set(keys_a))[:5]
        raise ExperimentError(f"Reports cover different slices (only in A: {only_a}, only in B: {only_b})")
    if label_a == label_b:
        label_b = f"{label_b} (2)"

    order_b = {key: i for i, key in enumerate(keys_b)}
    summary = ComparisonSummary(label_a, label_b, count=len(keys_a))
    for metric in METRICS:
        values_a = np.asarray(report_a.values(metric), dtype=np.float64)
        values_b = np.asarray(report_b.values(metric), dtype=np.float64)[[order_b[k] for k in keys_a]]
        finite = np.isfinite(values_a) & np.isfinite(values_b)
        if not finite.all():
            logger.warning("%s: %d non-finite pair(s) excluded from the t-test", metric, int((~finite).sum()))
        a, b = values_a[finite], values_b[finite]
        result = paired_t_test(a, b)
        mean_a, mean_b = float(a.mean()), float(b.mean())
        better = None
        if result.significant and mean_a != mean_b:
            a_wins = (mean_a > mean_b) == HIGHER_IS_BETTER[metric]
            better = label_a if a_wins else label_b
        summary.metrics.append(MetricComparison(
            metric, mean_a, mean_b, result.statistic, result.pvalue, result.significant, better
        ))
    return summary


def block_size_trend(rows: List[Dict[str, Any]]) -> str:
    """Describe PSNR as the block size shrinks from the no-chunking benchmark."""
    ordered = sorted(rows, key=lambda r: -r["block_size"])
    psnr = [r["psnr_mean"] for r in ordered]
    if len(psnr) < 3:
        return "Too few block sizes to describe a trend."
    peak = int(np.nanargmax(psnr))
    sizes = [r["block_size"] for r in ordered]
    if 0 < peak < len(psnr) - 1:
        shape = f"PSNR rises then declines as blocks shrink, peaking at {sizes[peak]}x{sizes[peak]}"
    elif peak == 0:
        shape = "PSNR is highest without chunking"
    else:
        shape = f"PSNR is highest at the smallest block size {sizes[peak]}x{sizes[peak]}"
    return f"{shape}. Expected at full scale: first rise, then decline (reported only, not checked)."


@dataclass
class MatrixResult:
    matrix: ExperimentMatrix
    runs: List[Dict[str, Any]]
    rows: List[Dict[str, Any]]
    reports: Dict[str, MetricReport]
    files: Dict[str, Path]
    notes: List[str] = field(default_factory=list)
    comparisons: List[ComparisonSummary] = field(default_factory=list)


class AblationService:
    """Runs experiment matrices and writes their tables, plots and panels."""

    def __init__(
        self,
        executor: Optional[IRunExecutor] = None,
        csv_exporter: Optional[CsvExporter] = None,
        markdown_exporter: Optional[MarkdownExporter] = None,
        plot_exporter: Optional[PlotExporter] = None,
    ):
        self._executor = executor or InlineRunExecutor()
        self._csv = csv_exporter or CsvExporter()
        self._markdown = markdown_exporter or MarkdownExporter()
        self._plots = plot_exporter or PlotExporter()

    def run_matrix(self, matrix: ExperimentMatrix) -> MatrixResult:
        matrix.validate()
        logger.info("Matrix %s: %d runs varying %s", matrix.name, len(matrix.runs), matrix.swept_keys)
        results = self._executor.run_all(matrix.payloads())

        reports: Dict[str, MetricReport] = {}
        rows = []
        for run, result in zip(matrix.runs, results):
            if not result.get("metrics_csv"):
                raise ExperimentError(f"Run {run.name!r} produced no test metrics (empty test cohort?)")
            report = read_report_csv(result["metrics_csv"])
            reports[run.name] = report
            rows.append(self._row(matrix, run, report))

        notes = self._notes(matrix, rows)
        comparisons = self._compare_to_baseline(matrix, reports)
        table = [self._display_row(matrix, row) for row in rows]
        files = {
            "csv": self._csv.export(rows, matrix.output_dir / TABLE_CSV),
            "markdown": self._markdown.export(table, matrix.output_dir / TABLE_MARKDOWN, title=matrix.name, notes=notes),
            "plot": self._plots.metric_bars(rows, matrix.output_dir / PLOT_FILE, "label", title=matrix.name),
        }
        if comparisons:
            significance = [row for summary in comparisons for row in summary.rows_long()]
            files["significance"] = self._markdown.export(
                significance,
                matrix.output_dir / SIGNIFICANCE_MARKDOWN,
                title=f"{matrix.name}: paired t-tests against {matrix.runs[0].name}",
                notes=["* marks the significantly better mean (p < 0.05)."],
            )
        for note in notes:
            logger.info("%s: %s", matrix.name, note)
        return MatrixResult(matrix, results, rows, reports, files, notes, comparisons)

    def run_block_size_sweep(self, base: CliConfig, sizes: Optional[Sequence[int]] = None,
                             output_dir: Optional[Path] = None) -> MatrixResult:
        out = output_dir or base.resolve_output_dir(".") / "block_size_sweep"
        return self.run_matrix(block_size_matrix(base, sizes, out))

    def run_modality_sweep(self, base: CliConfig, inputs: Optional[Sequence[Sequence[str]]] = None,
                           target: str = "FLAIR", output_dir: Optional[Path] = None) -> MatrixResult:
        out = output_dir or base.resolve_output_dir(".") / "modality_sweep"
        return self.run_matrix(modality_matrix(base, inputs, out, target=target))

    def _row(self, matrix: ExperimentMatrix, run: RunSpec, report: MetricReport) -> Dict[str, Any]:
        row: Dict[str, Any] = {"run": run.name, "label": run.label or run.name, "slices": report.sample_count}
        row.update(run.overrides if matrix.kind == "custom" else {})
        if matrix.kind == "block_size":
            row["block_size"] = run.overrides["laf_block_size"]
        for metric in METRICS:
            agg = report.aggregate(metric)
            row[f"{metric}_mean"] = agg.mean
            row[f"{metric}_std"] = agg.std
        return row

    def _display_row(self, matrix: ExperimentMatrix, row: Dict[str, Any]) -> Dict[str, Any]:
        display = {"run": row["label"], "slices": row["slices"]}
        for metric in METRICS:
            display[metric.upper()] = f"{row[f'{metric}_mean']:.4f} ± {row[f'{metric}_std']:.4f}"
        reference = REFERENCE_MODALITY_RESULTS.get(row["label"]) if matrix.kind == "modality" else None
        if matrix.kind == "modality":
            for metric in METRICS:
                display[f"full-scale {metric.upper()}"] = reference[metric] if reference else "-"
        return display

    def _notes(self, matrix: ExperimentMatrix, rows: List[Dict[str, Any]]) -> List[str]:
        if matrix.kind == "block_size":
            return [block_size_trend(rows)]
        if matrix.kind == "modality":
            return [f"Full-scale columns are BRATS2015 results after 200 epochs, {NOT_REPRODUCED}."]
        return []

    def _compare_to_baseline(self, matrix: ExperimentMatrix, reports: Dict[str, MetricReport]
                             ) -> List[ComparisonSummary]:
        baseline = matrix.runs[0]
        summaries = []
        for run in matrix.runs[1:]:
            try:
                summaries.append(compare_methods(
                    reports[run.name], reports[baseline.name], run.label or run.name, baseline.label or baseline.name
                ))
            except ModSynthError as e:
                logger.warning("Skipping significance test %s vs %s: %s", run.name, baseline.name, e)
        return summaries
