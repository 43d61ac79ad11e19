from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from ..shared.errors import UndefinedCorrelationError, UsageError


@dataclass(frozen=True)
class PairedSeries:
    x: List[float]
    y: List[float]
    labels: Optional[List[str]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise UsageError(f"series lengths differ: {len(self.x)} vs {len(self.y)}")
        if len(self.x) < 2:
            raise UsageError("correlation needs at least two pairs")
        if self.labels is not None and len(self.labels) != len(self.x):
            raise UsageError("labels must align with the series")
        if not all(math.isfinite(v) for v in (*self.x, *self.y)):
            raise UsageError("series contain non-finite values")


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    r = float(stats.pearsonr(x, y).statistic)
    return max(-1.0, min(1.0, r))


def plcc(s: PairedSeries) -> float:
    """Pearson linear correlation coefficient"""
    return _pearson(np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float))


def srcc(s: PairedSeries) -> float:
    """Spearman rank correlation; ties share their mean rank"""
    rx = stats.rankdata(np.asarray(s.x, dtype=float), method="average")
    ry = stats.rankdata(np.asarray(s.y, dtype=float), method="average")
    return _pearson(rx, ry)


def correlate(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """(srcc, plcc) for two aligned sequences"""
    series = PairedSeries(list(map(float, x)), list(map(float, y)))
    return srcc(series), plcc(series)
