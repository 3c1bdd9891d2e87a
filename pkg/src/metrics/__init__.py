from .image_quality import nrmse, psnr, slice_metrics, ssim, to_unit_range
from .report import METRICS, Aggregate, MetricReport
from .statistics import SIGNIFICANCE_LEVEL, TTestResult, paired_t_test

__all__ = [
    "METRICS",
    "SIGNIFICANCE_LEVEL",
    "Aggregate",
    "MetricReport",
    "TTestResult",
    "nrmse",
    "paired_t_test",
    "psnr",
    "slice_metrics",
    "ssim",
    "to_unit_range",
]
