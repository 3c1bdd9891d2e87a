import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from src.exceptions import MetricError

SIGNIFICANCE_LEVEL = 0.05


class TTestResult(NamedTuple):
    statistic: float
    pvalue: float

    @property
    def significant(self) -> bool:
        return self.pvalue < SIGNIFICANCE_LEVEL


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """
    Two-tailed paired t-test on ``a - b``.

    All-zero differences give (0, 1). Constant nonzero differences have zero
    variance and give (+/-inf, 0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise MetricError(f"Paired samples need equal 1-D shapes, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise MetricError("Paired t-test needs at least 2 pairs")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise MetricError("Paired t-test inputs must be finite")

    diff = a - b
    if np.all(diff == 0):
        return TTestResult(0.0, 1.0)
    if np.std(diff, ddof=1) == 0:
        return TTestResult(math.copysign(math.inf, float(diff.mean())), 0.0)

    result = stats.ttest_rel(a, b)
    return TTestResult(float(result.statistic), float(result.pvalue))
