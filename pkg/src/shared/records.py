"""
Line-oriented record I/O shared by every batch command.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Generic, Iterable, Iterator, List, Mapping, Sequence, Tuple, Type, TypeVar, Union

import jsonlines
from pydantic import BaseModel, ValidationError

from .errors import RecordError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


@dataclass
class RecordBatch(Generic[ModelT]):
    """Valid records with their line numbers, plus one error per bad line"""
    records: List[Tuple[int, ModelT]] = field(default_factory=list)
    errors: List[RecordError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def values(self) -> List[ModelT]:
        return [record for _, record in self.records]


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(part) for part in err.get("loc", ())) or "record"
    return f"{where}: {err.get('msg', 'invalid')}"


def iter_lines(path: Path) -> Iterator[Tuple[int, str]]:
    """Yield (1-based line number, stripped text) for non-blank lines"""
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            text = line.strip()
            if text:
                yield line_no, text


def iter_records(path: Path, model: Type[ModelT]) -> Iterator[Tuple[int, Union[ModelT, RecordError]]]:
    """Validate JSON lines one at a time, yielding a record or a RecordError per line"""
    for line_no, text in iter_lines(path):
        try:
            yield line_no, model.model_validate_json(text)
        except ValidationError as e:
            error = RecordError(line_no, _first_error(e))
            logger.warning(f"Rejected {path}:{error}")
            yield line_no, error


def read_records(path: Path, model: Type[ModelT]) -> RecordBatch[ModelT]:
    """Validate each JSON line against `model`; malformed lines never abort the batch"""
    batch: RecordBatch[ModelT] = RecordBatch()
    for line_no, item in iter_records(path, model):
        if isinstance(item, RecordError):
            batch.errors.append(item)
        else:
            batch.records.append((line_no, item))
    return batch


def write_jsonl(path: Path, rows: Iterable[Mapping[str, Any]]) -> int:
    out = Path(path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with jsonlines.open(out, mode="w", compact=True) as writer:
        for row in rows:
            writer.write(dict(row))
            count += 1
    return count


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    out = Path(path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
            count += 1
    return count


def _cell(value: Any) -> Any:
    if value is None:
        return "N.A."
    if isinstance(value, float):
        return repr(value)
    return value
