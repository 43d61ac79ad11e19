from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..shared.errors import UsageError
from .expectation import MetricReport

logger = logging.getLogger(__name__)

CURVE_METRICS = ("ncm", "ncm_star", "ce")
SERIES_HEADER = ("step",) + CURVE_METRICS
REPORT_HEADER = ("metric", "first_window", "last_window", "ratio_pct")


def convergence_ratio(first: float, last: float) -> float:
    """Signed percentage change from the first to the last window"""
    if first == 0:
        raise ZeroDivisionError("convergence ratio is undefined when the first window is 0")
    return 100.0 * (last - first) / first


@dataclass(frozen=True)
class WindowSummary:
    metric: str
    first: float
    last: float
    ratio: Optional[float]


@dataclass(frozen=True)
class CurveReport:
    window: int
    steps: int
    rows: List[WindowSummary]

    def get(self, metric: str) -> WindowSummary:
        for row in self.rows:
            if row.metric == metric:
                return row
        raise KeyError(metric)

    def to_rows(self) -> List[Tuple[str, float, float, Optional[float]]]:
        return [(r.metric, r.first, r.last, r.ratio) for r in self.rows]


def curve_report(series: Sequence[Tuple[int, MetricReport]], window: int = 100) -> CurveReport:
    """Mean NCM, NCM* and CE over the first and last `window` steps"""
    if window < 1:
        raise UsageError(f"window must be >= 1, got {window}")
    if window > len(series):
        raise UsageError(f"window {window} exceeds series length {len(series)}")
    steps = [step for step, _ in series]
    if any(a > b for a, b in zip(steps, steps[1:])):
        raise UsageError("curve series must be sorted by step")

    rows: List[WindowSummary] = []
    for metric in CURVE_METRICS:
        values = np.array([getattr(report, metric) for _, report in series], dtype=float)
        first = float(np.mean(values[:window]))
        last = float(np.mean(values[-window:]))
        try:
            ratio: Optional[float] = convergence_ratio(first, last)
        except ZeroDivisionError:
            logger.info(f"First-window mean of {metric} is 0; ratio reported as N.A.")
            ratio = None
        rows.append(WindowSummary(metric, first, last, ratio))
    return CurveReport(window=window, steps=len(series), rows=rows)


def series_rows(series: Sequence[Tuple[int, MetricReport]]) -> List[Tuple[int, float, float, float]]:
    """Plot-ready (step, ncm, ncm_star, ce) rows"""
    return [(step, r.ncm, r.ncm_star, r.ce) for step, r in series]
