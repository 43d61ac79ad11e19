"""
Run counters for batch commands.
Prometheus-style collectors kept in a private registry; nothing is served.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator

try:
    from prometheus_client import CollectorRegistry, Counter, Histogram
    PROMETHEUS_AVAILABLE = True
except ImportError:
    PROMETHEUS_AVAILABLE = False
    logging.warning("prometheus_client not available. Metrics will use fallback implementation.")

logger = logging.getLogger(__name__)


class MetricsCollector:
    """Counts records read/rejected and times pipeline stages"""

    def __init__(self) -> None:
        self._records: Dict[str, int] = {}
        self._durations: Dict[str, float] = {}
        if PROMETHEUS_AVAILABLE:
            self.registry = CollectorRegistry()
            self.records_total = Counter(
                "scoretk_records_total",
                "Input records processed",
                ["kind", "status"],
                registry=self.registry,
            )
            self.stage_duration = Histogram(
                "scoretk_stage_duration_seconds",
                "Time spent per pipeline stage",
                ["stage"],
                registry=self.registry,
            )

    def record(self, kind: str, status: str = "ok", count: int = 1) -> None:
        if count <= 0:
            return
        key = f"{kind}:{status}"
        self._records[key] = self._records.get(key, 0) + count
        if PROMETHEUS_AVAILABLE:
            self.records_total.labels(kind=kind, status=status).inc(count)

    def observe_stage(self, stage: str, duration: float) -> None:
        self._durations[stage] = self._durations.get(stage, 0.0) + duration
        if PROMETHEUS_AVAILABLE:
            self.stage_duration.labels(stage=stage).observe(duration)

    @contextmanager
    def time_stage(self, stage: str) -> Iterator[None]:
        start_time = time.perf_counter()
        try:
            yield
        finally:
            self.observe_stage(stage, time.perf_counter() - start_time)

    def summary(self) -> Dict[str, Any]:
        return {
            "prometheus_available": PROMETHEUS_AVAILABLE,
            "records": dict(sorted(self._records.items())),
            "stage_seconds": {k: round(v, 6) for k, v in sorted(self._durations.items())},
        }

    def reset(self) -> None:
        self.__init__()  # type: ignore[misc]


metrics = MetricsCollector()
