"""Kolmogorov-Smirnov checks against the uniform law."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from prepivot.errors import DomainError


@dataclass(frozen=True)
class KsResult:
    statistic: float
    pvalue: float
    size: int

    def passes(self, threshold: float = 0.01) -> bool:
        return self.pvalue > threshold


def ks_uniform(sample) -> KsResult:
    """KS distance of ``sample`` to U[0, 1] with its asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size < 10:
        raise DomainError("KS uniformity needs at least 10 values")
    if np.isnan(x).any() or x[0] < 0.0 or x[-1] > 1.0:
        raise DomainError("KS uniformity needs values in [0, 1]")
    n = x.size
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))
    return KsResult(d, float(stats.kstwobign.sf(d * np.sqrt(n))), n)


def ks_two_sample(a, b) -> KsResult:
    """Two-sample KS test (asymptotic p-value)."""
    res = stats.ks_2samp(np.asarray(a, float), np.asarray(b, float), method="asymp")
    return KsResult(float(res.statistic), float(res.pvalue), min(len(a), len(b)))
