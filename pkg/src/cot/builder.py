"""
Training conversations for the two fine-tuning stages.

Stage 1 teaches the fine-grained attributes, one attribute per conversation
(ATTR), one level per conversation (LEVEL), all attributes at once (MIX), or
the union of the three. Stage 2 teaches the score, either as a direct answer
(Q1R1), prose reasoning (Q2R2) or an extractable key-value block (Q3R3).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

from ..models.schemas import ConversationRecord
from ..rank.attributes import (
    CODED_FIELDS,
    DISPLAY_NAMES,
    HIGH_TO_LOW,
    LEVEL_ORDERS,
    LEVELS,
    AttributeVector,
    attribute_encode,
    label_for,
    ordered_attributes,
)
from ..score.grid import ScoreValue, render
from ..shared.errors import BuildError, UsageError
from .templates import TemplateBank, load_bank

logger = logging.getLogger(__name__)

ATTR = "ATTR"
LEVEL = "LEVEL"
MIX = "MIX"
UNION = "UNION"
STAGE1_MODES = (ATTR, LEVEL, MIX, UNION)

Q1R1 = "Q1R1"
Q2R2 = "Q2R2"
Q3R3 = "Q3R3"
STAGE2_FORMS = (Q1R1, Q2R2, Q3R3)


@dataclass(frozen=True)
class ConversationSample:
    id: str
    template: str
    prompt: str
    response: str
    payload: Dict[str, Any] = field(default_factory=dict)
    level_order: str = HIGH_TO_LOW


@dataclass(frozen=True)
class Stage1Input:
    """Labelled attributes of one image plus the carried-through free text"""
    id: str
    attributes: Mapping[str, Any]
    subject: Optional[str] = None
    reasons: Mapping[str, str] = field(default_factory=dict)


def _one_line(text: str) -> str:
    return " ".join(text.split())


def _value_text(name: str, vector: AttributeVector, subject: Optional[str]) -> str:
    if name == "subject":
        return _one_line(subject or "")
    return label_for(name, getattr(vector, name))


def _check_level_order(level_order: str) -> None:
    if level_order not in LEVEL_ORDERS:
        raise UsageError(f"level order must be one of {LEVEL_ORDERS}, got {level_order!r}")


class _Stage1Writer:
    def __init__(self, record: Stage1Input, level_order: str, bank: TemplateBank):
        for name in CODED_FIELDS:
            if name not in record.attributes:
                raise BuildError(name)
        if not record.subject or not record.subject.strip():
            raise BuildError("subject")
        self.record = record
        self.vector = attribute_encode(record.attributes)
        self.level_order = level_order
        self.bank = bank
        self.payload: Dict[str, Any] = {
            "attributes": self.vector.as_dict(),
            "subject": _one_line(record.subject),
            "reasons": dict(record.reasons),
        }

    def lines(self, names: Sequence[str]) -> str:
        out: List[str] = []
        for name in names:
            out.append(self.bank.fill(
                "attr.line",
                name=DISPLAY_NAMES[name],
                value=_value_text(name, self.vector, self.record.subject),
            ))
            reason = self.record.reasons.get(name)
            if reason:
                out.append(self.bank.fill("attr.reason", reason=_one_line(reason)))
        return "\n".join(out)

    def sample(self, suffix: Optional[str], template: str, prompt: str, names: Sequence[str]) -> ConversationSample:
        sample_id = self.record.id if suffix is None else f"{self.record.id}:{suffix}"
        return ConversationSample(
            id=sample_id,
            template=template,
            prompt=prompt,
            response=self.lines(names),
            payload=self.payload,
            level_order=self.level_order,
        )

    def attr(self) -> List[ConversationSample]:
        return [
            self.sample(name, ATTR, self.bank.get(f"attr.{name}.question"), [name])
            for name in ordered_attributes(self.level_order)
        ]

    def level(self) -> List[ConversationSample]:
        levels = ["high", "middle", "low"]
        if self.level_order != HIGH_TO_LOW:
            levels.reverse()
        return [
            self.sample(level, LEVEL, self.bank.get(f"level.{level}.question"), LEVELS[level])
            for level in levels
        ]

    def mix(self) -> List[ConversationSample]:
        first, last = ("high", "low") if self.level_order == HIGH_TO_LOW else ("low", "high")
        prompt = self.bank.fill("mix.question", first=first, last=last)
        return [self.sample(None, MIX, prompt, ordered_attributes(self.level_order))]


def build_stage1(record: Stage1Input, mode: str, level_order: str = HIGH_TO_LOW,
                 bank: Optional[TemplateBank] = None) -> List[ConversationSample]:
    """Stage-1 attribute conversations: 10 (ATTR), 3 (LEVEL), 1 (MIX) or 14 (UNION)"""
    if mode not in STAGE1_MODES:
        raise UsageError(f"stage-1 mode must be one of {STAGE1_MODES}, got {mode!r}")
    _check_level_order(level_order)
    writer = _Stage1Writer(record, level_order, bank or load_bank())
    if mode == ATTR:
        return writer.attr()
    if mode == LEVEL:
        return writer.level()
    if mode == MIX:
        return writer.mix()
    return writer.mix() + writer.level() + writer.attr()


def _stage2_names(level_order: str, subject: Optional[str]) -> List[str]:
    return ordered_attributes(level_order, include_subject=bool(subject and subject.strip()))


def build_stage2(id: str, score: ScoreValue, attrs: Optional[AttributeVector], form: str,
                 level_order: str = HIGH_TO_LOW, subject: Optional[str] = None,
                 bank: Optional[TemplateBank] = None) -> ConversationSample:
    """One scoring conversation in the requested answer form"""
    if form not in STAGE2_FORMS:
        raise UsageError(f"stage-2 form must be one of {STAGE2_FORMS}, got {form!r}")
    _check_level_order(level_order)
    bank = bank or load_bank()
    rendered = render(score)
    payload: Dict[str, Any] = {"score": rendered, "m": score.m}

    if form == Q1R1:
        response = bank.fill("q1r1.answer", score=rendered)
    else:
        if attrs is None:
            raise UsageError(f"{form} conversations need attributes for record '{id}'")
        payload["attributes"] = attrs.as_dict()
        names = _stage2_names(level_order, subject)
        if "subject" in names:
            payload["subject"] = _one_line(subject or "")
        if form == Q3R3:
            lines = [
                bank.fill("q3r3.line", name=DISPLAY_NAMES[name], value=_value_text(name, attrs, subject))
                for name in names
            ]
            lines.append(bank.fill("q3r3.final", score=rendered))
            response = "\n".join(lines)
        else:
            sentences = [bank.fill(f"q2r2.{name}", value=_value_text(name, attrs, subject)) for name in names]
            sentences.append(bank.fill("q1r1.answer", score=rendered))
            response = " ".join(sentences)

    return ConversationSample(
        id=id,
        template=form,
        prompt=bank.get(f"{form.lower()}.question"),
        response=response,
        payload=payload,
        level_order=level_order,
    )


def assign_forms(ids: Sequence[str], ratios: Mapping[str, float], seed: int = 0) -> Dict[str, str]:
    """Deterministic stage-2 form per id, drawn in proportion to `ratios`"""
    if not ratios:
        raise UsageError("at least one stage-2 form ratio is required")
    unknown = set(ratios) - set(STAGE2_FORMS)
    if unknown:
        raise UsageError(f"unknown stage-2 forms {sorted(unknown)}")
    if any(r < 0 for r in ratios.values()) or sum(ratios.values()) <= 0:
        raise UsageError("form ratios must be non-negative with a positive sum")

    total = sum(ratios.values())
    forms = [f for f in STAGE2_FORMS if ratios.get(f, 0) > 0]
    bounds: List[float] = []
    acc = 0.0
    for f in forms:
        acc += ratios[f] / total
        bounds.append(acc)

    assigned: Dict[str, str] = {}
    for sample_id in ids:
        digest = hashlib.sha256(f"{seed}:{sample_id}".encode("utf-8")).digest()
        u = int.from_bytes(digest[:8], "big") / 2**64
        assigned[sample_id] = next((f for f, b in zip(forms, bounds) if u < b), forms[-1])
    return assigned


def to_message_record(sample: ConversationSample) -> Dict[str, Any]:
    """Chat fine-tuning record {id, messages, meta}"""
    record = ConversationRecord.model_validate({
        "id": sample.id,
        "messages": [
            {"role": "user", "content": sample.prompt},
            {"role": "assistant", "content": sample.response},
        ],
        "meta": {"template": sample.template, "level_order": sample.level_order},
    })
    return record.model_dump()
