import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import pandas as pd
from dataclasses_json import dataclass_json

from src.exceptions import MetricError

logger = logging.getLogger(__name__)

METRICS = ("psnr", "ssim", "nrmse")
COLUMNS = ["subject_id", "slice_index", *METRICS]


@dataclass
class Aggregate:
    mean: float
    std: float
    count: int
    excluded: int = 0

    def format(self, precision: int = 4) -> str:
        return f"{self.mean:.{precision}f} ± {self.std:.{precision}f}"


@dataclass_json
@dataclass
class MetricReport:
    """Per-slice PSNR/SSIM/NRMSE with mean ± sample-std aggregates."""

    label: str = ""
    subject_ids: List[str] = field(default_factory=list)
    slice_indices: List[int] = field(default_factory=list)
    psnr: List[float] = field(default_factory=list)
    ssim: List[float] = field(default_factory=list)
    nrmse: List[float] = field(default_factory=list)

    def add(self, subject_id: str, slice_index: int, psnr: float, ssim: float, nrmse: float) -> None:
        self.subject_ids.append(subject_id)
        self.slice_indices.append(int(slice_index))
        self.psnr.append(float(psnr))
        self.ssim.append(float(ssim))
        self.nrmse.append(float(nrmse))

    @property
    def sample_count(self) -> int:
        return len(self.subject_ids)

    def keys(self) -> List[Tuple[str, int]]:
        return list(zip(self.subject_ids, self.slice_indices))

    def values(self, metric: str) -> List[float]:
        if metric not in METRICS:
            raise MetricError(f"Unknown metric {metric!r}, expected one of {METRICS}")
        return getattr(self, metric)

    def aggregate(self, metric: str) -> Aggregate:
        """Mean and sample std over finite values; non-finite slices are excluded."""
        values = self.values(metric)
        finite = [v for v in values if math.isfinite(v)]
        excluded = len(values) - len(finite)
        if excluded:
            logger.warning(
                "%s: excluded %d non-finite %s value(s) from the aggregate", self.label or "report", excluded, metric
            )
        n = len(finite)
        if n == 0:
            return Aggregate(math.nan, math.nan, 0, excluded)
        mean = math.fsum(finite) / n
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in finite) / (n - 1)) if n > 1 else 0.0
        return Aggregate(mean, std, n, excluded)

    def summary(self) -> Dict[str, Dict[str, float]]:
        result = {}
        for metric in METRICS:
            agg = self.aggregate(metric)
            result[metric] = {"mean": agg.mean, "std": agg.std, "count": agg.count}
        return result

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "subject_id": self.subject_ids,
                "slice_index": self.slice_indices,
                "psnr": self.psnr,
                "ssim": self.ssim,
                "nrmse": self.nrmse,
            },
            columns=COLUMNS,
        )

    def sorted(self) -> "MetricReport":
        order = sorted(range(self.sample_count), key=lambda i: (self.subject_ids[i], self.slice_indices[i]))
        report = MetricReport(label=self.label)
        for i in order:
            report.add(self.subject_ids[i], self.slice_indices[i], self.psnr[i], self.ssim[i], self.nrmse[i])
        return report
