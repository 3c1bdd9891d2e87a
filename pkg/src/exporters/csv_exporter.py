from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from src.interfaces.exporter import IExporter
from src.metrics.report import COLUMNS, METRICS, MetricReport

FOOTER_LABEL = "mean ± std"


class CsvExporter(IExporter):
    """
    CSV exporter for metric reports and summary tables.

    A MetricReport becomes one row per slice (``subject_id, slice_index,
    psnr, ssim, nrmse``) followed by an aggregate footer row.
    """

    def __init__(self, precision: int = 4):
        self.precision = precision

    def export(self, data: Union[MetricReport, List[Dict[str, Any]], pd.DataFrame], output_path: Path) -> Path:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)

        if isinstance(data, MetricReport):
            df = self._report_frame(data)
        elif isinstance(data, pd.DataFrame):
            df = data
        elif data and isinstance(data[0], dict):
            df = pd.DataFrame(data)
        else:
            raise ValueError(f"Unsupported data for CSV export: {type(data)}")

        df.to_csv(output_path, index=False)
        return output_path

    def _report_frame(self, report: MetricReport) -> pd.DataFrame:
        frame = report.to_frame().astype(object)
        footer = {"subject_id": FOOTER_LABEL, "slice_index": ""}
        for metric in METRICS:
            footer[metric] = report.aggregate(metric).format(self.precision)
        return pd.concat([frame, pd.DataFrame([footer], columns=COLUMNS)], ignore_index=True)


def read_report_csv(path: Union[str, Path]) -> MetricReport:
    """Inverse of the report export; the footer row is dropped."""
    df = pd.read_csv(path, dtype={"subject_id": str})
    df = df[df["subject_id"] != FOOTER_LABEL]
    report = MetricReport(label=Path(path).stem)
    for row in df.itertuples(index=False):
        report.add(row.subject_id, int(row.slice_index), float(row.psnr), float(row.ssim), float(row.nrmse))
    return report
