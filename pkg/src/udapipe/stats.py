"""Paired t-test with threshold significance from an embedded critical-value table."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, DimensionMismatchError, InsufficientSamplesError, ValidationError

ALPHAS = (0.05, 0.01, 0.001)

# two-sided Student-t critical values t_{1 - alpha/2, df} for df = 1..30
CRITICAL_VALUES = {
    1: (12.7062, 63.6567, 636.619),
    2: (4.30265, 9.92484, 31.5991),
    3: (3.18245, 5.84091, 12.9240),
    4: (2.77645, 4.60409, 8.61030),
    5: (2.57058, 4.03214, 6.86883),
    6: (2.44691, 3.70743, 5.95882),
    7: (2.36462, 3.49948, 5.40788),
    8: (2.30600, 3.35539, 5.04131),
    9: (2.26216, 3.24984, 4.78091),
    10: (2.22814, 3.16927, 4.58689),
    11: (2.20099, 3.10581, 4.43698),
    12: (2.17881, 3.05454, 4.31779),
    13: (2.16037, 3.01228, 4.22083),
    14: (2.14479, 2.97684, 4.14045),
    15: (2.13145, 2.94671, 4.07277),
    16: (2.11991, 2.92078, 4.01500),
    17: (2.10982, 2.89823, 3.96513),
    18: (2.10092, 2.87844, 3.92165),
    19: (2.09302, 2.86093, 3.88341),
    20: (2.08596, 2.84534, 3.84952),
    21: (2.07961, 2.83136, 3.81928),
    22: (2.07387, 2.81876, 3.79213),
    23: (2.06866, 2.80734, 3.76763),
    24: (2.06390, 2.79694, 3.74540),
    25: (2.05954, 2.78744, 3.72514),
    26: (2.05553, 2.77871, 3.70661),
    27: (2.05183, 2.77068, 3.68959),
    28: (2.04841, 2.76326, 3.67391),
    29: (2.04523, 2.75639, 3.65941),
    30: (2.04227, 2.75000, 3.64596),
}


def critical_values(df):
    """Critical values for ``ALPHAS``; beyond df = 30 the df = 30 row is used (conservative)."""
    if df < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got {df}")
    return dict(zip(ALPHAS, CRITICAL_VALUES[min(df, 30)]))


@dataclass(frozen=True)
class TTestResult:
    mean_diff: float
    sd_diff: float
    t_statistic: float
    degrees_freedom: int
    significant_at: tuple  # subset of ALPHAS, loosest first

    def to_dict(self):
        return {
            "mean_diff": self.mean_diff,
            "sd_diff": self.sd_diff,
            "t_statistic": self.t_statistic,
            "degrees_freedom": self.degrees_freedom,
            "significant_at": list(self.significant_at),
        }


def mean_sd(values):
    """Mean and sample standard deviation (divisor n - 1)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise InsufficientSamplesError("need at least 2 values")
    return float(np.mean(v)), float(np.std(v, ddof=1))


def paired_t_test(a, b):
    """Two-sided paired t-test on ``a - b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"paired samples need equal 1-D shapes, got {a.shape} and {b.shape}")
    n = a.size
    if n < 2:
        raise InsufficientSamplesError("paired t-test needs at least 2 pairs")
    diff = a - b
    mean, sd = mean_sd(diff)
    if not sd > 1e-12 * np.max(np.abs(diff)):
        raise DegenerateVarianceError("differences have zero variance; t is undefined")
    t = mean / (sd / math.sqrt(n))
    crit = critical_values(n - 1)
    significant = tuple(alpha for alpha in ALPHAS if abs(t) > crit[alpha])
    return TTestResult(mean, sd, float(t), n - 1, significant)
