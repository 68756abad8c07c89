from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class Comparison:
    statistic: float
    p_value: float
    significant: bool


def compare_samples(a: np.ndarray, b: np.ndarray, *, level: float = SIGNIFICANCE_LEVEL) -> Comparison:
    """Welch's t-test between two per-seed metric samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        return Comparison(statistic=float("nan"), p_value=float("nan"), significant=False)
    res = stats.ttest_ind(a, b, equal_var=False)
    p = float(res.pvalue)
    return Comparison(statistic=float(res.statistic), p_value=p, significant=bool(np.isfinite(p) and p < level))
