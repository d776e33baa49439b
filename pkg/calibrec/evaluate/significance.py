from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats


class TTestResult(NamedTuple):
    t: float
    p: float
    significant: bool


def paired_t_test(sample_a: Sequence[float], sample_b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """Two-sided paired t-test on a - b.

    Degenerate differences: all zero gives t=0, p=1; constant nonzero gives
    p=0 with t=+-inf.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples must be 1-d and equal length, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise ValueError("paired t-test needs at least two pairs")
    d = a - b
    if np.all(d == 0):
        return TTestResult(0.0, 1.0, False)
    if np.ptp(d) == 0:
        return TTestResult(math.copysign(math.inf, float(d[0])), 0.0, True)
    res = stats.ttest_rel(a, b)
    t, p = float(res.statistic), float(res.pvalue)
    return TTestResult(t, p, p < alpha)
