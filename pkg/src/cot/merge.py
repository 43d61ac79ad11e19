from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from ..models.schemas import AttributeRecord, MosRecord, Stage2Record
from ..score.grid import QuantizerConfig, normalize, quantize, render
from ..shared.errors import DomainError, RecordError
from ..shared.records import iter_records, read_records

logger = logging.getLogger(__name__)


@dataclass
class MergeResult:
    records: List[Stage2Record] = field(default_factory=list)
    skipped_ids: List[str] = field(default_factory=list)
    errors: List[RecordError] = field(default_factory=list)


def merge_self_labels(mos_path: Path, attr_path: Path, cfg: QuantizerConfig) -> MergeResult:
    """Inner-join MOS and predicted attributes on id, emitting grid scores.

    The attribute file is held in a hash table; the MOS file is streamed and
    drives output order. Ids found in only one file land in `skipped_ids`
    (MOS-only ids first, then attribute-only ids, each in file order).
    """
    result = MergeResult()

    attr_batch = read_records(attr_path, AttributeRecord)
    result.errors.extend(attr_batch.errors)
    by_id: Dict[str, AttributeRecord] = {}
    for line_no, record in attr_batch.records:
        if record.id in by_id:
            result.errors.append(RecordError(line_no, f"duplicate id '{record.id}' in {attr_path}"))
            continue
        by_id[record.id] = record

    joined: set[str] = set()
    seen: set[str] = set()
    for line_no, mos in iter_records(mos_path, MosRecord):
        if isinstance(mos, RecordError):
            result.errors.append(mos)
            continue
        seen.add(mos.id)
        attrs = by_id.get(mos.id)
        if attrs is None:
            result.skipped_ids.append(mos.id)
            continue
        if mos.id in joined:
            result.errors.append(RecordError(line_no, f"duplicate id '{mos.id}' in {mos_path}"))
            continue
        try:
            score = quantize(normalize(mos.mos, cfg), cfg.m)
        except DomainError as e:
            result.errors.append(RecordError(line_no, str(e)))
            continue
        joined.add(mos.id)
        result.records.append(Stage2Record(
            id=mos.id,
            score=render(score),
            m=cfg.m,
            mos=mos.mos,
            attributes=dict(attrs.attributes),
            subject=attrs.subject,
        ))

    result.skipped_ids.extend(i for i in by_id if i not in seen)
    logger.info(
        f"Merged {len(result.records)} records; {len(result.skipped_ids)} ids skipped, "
        f"{len(result.errors)} line errors"
    )
    return result
