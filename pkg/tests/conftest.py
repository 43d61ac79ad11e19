"""
Shared fixtures for the toolkit tests.
"""

import json
import logging

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.cot.templates import load_bank
from src.ncm.expectation import MetricReport
from src.shared.metrics import metrics

settings.register_profile(
    "toolkit",
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("toolkit")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bank():
    return load_bank()


@pytest.fixture(autouse=True)
def clean_metrics():
    metrics.reset()
    yield
    metrics.reset()


@pytest.fixture(autouse=True)
def restore_root_logging():
    """CLI runs install a JSON handler on the root logger; put the old ones back"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def write_jsonl(tmp_path):
    """Write rows (dicts or raw strings) to a JSONL file under tmp_path"""

    def _write(name, rows):
        path = tmp_path / name
        lines = [r if isinstance(r, str) else json.dumps(r) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def make_report():
    def _make(ncm, ncm_star=1.0, ce=1.0):
        return MetricReport(
            ncm=ncm, ncm_star=ncm_star, ce=ce, expectation=5.0, expectation_star=4.5, n_samples=4
        )

    return _make
