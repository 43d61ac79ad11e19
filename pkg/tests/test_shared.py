"""
Tests for configuration, record I/O, metrics and logging.
"""

import json
import logging

import pytest
from pydantic import ValidationError

from src.models.schemas import CompositeModelDocument, LogitRecord, MosRecord, SortTrialRecord, Stage2Record
from src.shared.config import RunConfig, load_run_config, settings
from src.shared.errors import (
    BuildError,
    DomainError,
    FitError,
    RecordError,
    SourceRangeError,
    ToolkitError,
    UsageError,
)
from src.shared.logging import get_event_logger, setup_json_logging
from src.shared.metrics import MetricsCollector
from src.shared.records import iter_records, read_records, write_csv
from src.shared.records import write_jsonl as write_jsonl_rows


class TestSettings:
    """Built-in defaults"""

    def test_defaults(self):
        assert settings.digits == 3
        assert settings.window == 100
        assert settings.pls_components == 3
        assert settings.sort_trials == 200
        assert settings.level_order == "high-to-low"

    def test_settings_are_frozen(self):
        with pytest.raises(AttributeError):
            settings.digits = 2


class TestRunConfig:
    """--config documents"""

    def test_flat_and_sectioned(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"m": 2, "seed": 5, "simulate": {"seed": 9}}), encoding="utf-8")
        default_map = load_run_config(path, ["quantize", "simulate"])
        assert default_map["quantize"] == {"m": 2, "seed": 5}
        assert default_map["simulate"] == {"m": 2, "seed": 9}

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"digits": 3}), encoding="utf-8")
        with pytest.raises(UsageError):
            load_run_config(path, ["quantize"])

    def test_bad_range(self):
        with pytest.raises(ValidationError):
            RunConfig(lo=5.0, hi=1.0)

    def test_bad_level_order(self):
        with pytest.raises(ValidationError):
            RunConfig(level_order="sideways")

    def test_unreadable(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(UsageError):
            load_run_config(path, [])
        with pytest.raises(UsageError):
            load_run_config(tmp_path / "absent.json", [])

    def test_flags_drop_unset(self):
        assert RunConfig(k=2).flags() == {"k": 2}


class TestErrors:
    """Exception hierarchy"""

    def test_hierarchy(self):
        assert issubclass(SourceRangeError, DomainError)
        assert issubclass(DomainError, ValueError)
        for cls in (DomainError, UsageError, BuildError, FitError, RecordError):
            assert issubclass(cls, ToolkitError)

    def test_messages(self):
        assert str(RecordError(4, "bad")) == "line 4: bad"
        assert "3" in str(FitError(3, 1))
        assert BuildError("exposure").field == "exposure"


class TestRecords:
    """Line-delimited record reading and writing"""

    def test_read_with_errors(self, write_jsonl):
        path = write_jsonl("mos.jsonl", [
            {"id": "a", "mos": 1.5},
            "",
            "{nope",
            {"id": "", "mos": 2.0},
            {"id": "b", "mos": 3.0},
        ])
        batch = read_records(path, MosRecord)
        assert [r.id for r in batch.values()] == ["a", "b"]
        assert [line for line, _ in batch.records] == [1, 5]
        assert [e.line_no for e in batch.errors] == [3, 4]
        assert not batch.ok

    def test_iter_records_is_lazy(self, write_jsonl):
        path = write_jsonl("mos.jsonl", ["[1]", {"id": "a", "mos": 1.0}])
        stream = iter_records(path, MosRecord)
        line_no, first = next(stream)
        assert (line_no, type(first)) == (1, RecordError)
        line_no, second = next(stream)
        assert (line_no, second.id) == (2, "a")
        assert next(stream, None) is None

    def test_write_jsonl(self, tmp_path):
        out = tmp_path / "nested" / "rows.jsonl"
        assert write_jsonl_rows(out, [{"a": 1}, {"b": [1, 2]}]) == 2
        assert out.read_text(encoding="utf-8").splitlines() == ['{"a":1}', '{"b":[1,2]}']

    def test_write_csv_na_and_floats(self, tmp_path):
        out = tmp_path / "t.csv"
        write_csv(out, ("name", "value"), [("x", None), ("y", 0.1 + 0.2), ("z", 3)])
        assert out.read_text(encoding="utf-8").splitlines() == [
            "name,value", "x,N.A.", "y,0.30000000000000004", "z,3",
        ]


class TestSchemas:
    """Record validation"""

    def test_logit_record_shape(self):
        with pytest.raises(ValidationError):
            LogitRecord(id="a", gt="3.9", m=2, logits=[[0.0] * 10])
        with pytest.raises(ValidationError):
            LogitRecord(id="a", gt="3.9", m=2, logits=[[0.0] * 10, [0.0] * 8])
        record = LogitRecord(id="a", gt="3.9", m=2, logits=[[0.0] * 10] * 2)
        assert record.gt_score().digits == (3, 9)

    def test_logit_record_bad_gt(self):
        with pytest.raises(ValidationError):
            LogitRecord(id="a", gt="x", m=1, logits=[[0.0] * 10])

    def test_mos_must_be_finite(self):
        with pytest.raises(ValidationError):
            MosRecord.model_validate_json('{"id": "a", "mos": NaN}')

    def test_sort_trial_needs_prediction(self):
        with pytest.raises(ValidationError):
            SortTrialRecord(gt=[1.0])
        assert SortTrialRecord(gt=[1.0], response="[1.0]").pred is None

    def test_stage2_score(self):
        assert Stage2Record(id="a", score="4.25").score_value().m == 3
        with pytest.raises(ValidationError):
            Stage2Record(id="a", score="12")

    def test_model_document(self):
        with pytest.raises(ValidationError):
            CompositeModelDocument(weights=[1.0], intercept=0.0, k=2, x_means=[0.0], y_mean=0.0,
                                   attribute_order=["a"])
        with pytest.raises(ValidationError):
            CompositeModelDocument(weights=[1.0], intercept=0.0, k=1, x_means=[0.0], y_mean=0.0,
                                   attribute_order=["a"], extra=1)


class TestMetrics:
    """Run counters"""

    def test_counts_and_stages(self):
        collector = MetricsCollector()
        collector.record("logits", "ok", 5)
        collector.record("logits", "rejected", 0)
        collector.record("logits", "rejected", 2)
        with collector.time_stage("ncm"):
            pass
        summary = collector.summary()
        assert summary["records"] == {"logits:ok": 5, "logits:rejected": 2}
        assert "ncm" in summary["stage_seconds"]

    def test_reset(self):
        collector = MetricsCollector()
        collector.record("x")
        collector.reset()
        assert collector.summary()["records"] == {}


class TestLogging:
    """JSON log lines"""

    def test_json_lines(self, capsys):
        setup_json_logging(logging.INFO)
        get_event_logger("scoretk.test").info("stage_done", records=3)
        logging.getLogger("scoretk.plain").debug("hidden")
        lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
        assert len(lines) == 1
        event = json.loads(lines[0])
        assert event["event"] == "stage_done"
        assert event["records"] == 3
        assert event["level"] == "info"
        assert event["logger"] == "scoretk.test"
        assert "ts" in event
