"""
Score and attribute extraction from model responses.

Patterns are built from the template bank, so a response produced by the
builder always parses back to its payload. Fields that do not match are
reported in diagnostics and never guessed.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..rank.attributes import CODED_FIELDS, DISPLAY_NAMES, AttributeVector, encode_label
from ..score.grid import ScoreValue, parse_score
from ..shared.errors import DomainError, EnumeratedValueError, ExtractionError, ScoreParseError, UsageError
from .builder import Q1R1, Q2R2, Q3R3, STAGE2_FORMS
from .templates import TemplateBank, load_bank

logger = logging.getLogger(__name__)

MULTIPLE_SCORE = "multiple-score"
MISSING = "missing"
UNKNOWN_ATTRIBUTE = "unknown-attribute"
BAD_LABEL = "bad-label"
BAD_SCORE = "bad-score"

_KEY_VALUE_LINE = re.compile(r"^[ \t]*(?P<key>[^:\n]+?)[ \t]*:[ \t]*(?P<value>[^\n]*?)[ \t]*$", re.MULTILINE)
_FIELD_BY_NAME = {name.lower(): field_name for field_name, name in DISPLAY_NAMES.items()}


@dataclass
class ParsedResponse:
    score: Optional[ScoreValue] = None
    attributes: Dict[str, int] = field(default_factory=dict)
    subject: Optional[str] = None
    diagnostics: List[Tuple[str, str]] = field(default_factory=list)

    def vector(self) -> Optional[AttributeVector]:
        """Full attribute vector, or None when any coded field is missing"""
        if any(name not in self.attributes for name in CODED_FIELDS):
            return None
        return AttributeVector(**{name: self.attributes[name] for name in CODED_FIELDS})

    def as_record(self, record_id: str) -> Dict[str, object]:
        return {
            "id": record_id,
            "score": None if self.score is None else str(self.score),
            "attributes": dict(self.attributes),
            "subject": self.subject,
            "diagnostics": [list(d) for d in self.diagnostics],
        }


def _score_matches(text: str, bank: TemplateBank, form: Optional[str]) -> List[re.Match[str]]:
    names = {Q1R1: ["q1r1.answer"], Q2R2: ["q1r1.answer"], Q3R3: ["q3r3.final"]}.get(
        form or "", ["q1r1.answer", "q3r3.final"]
    )
    found: List[re.Match[str]] = []
    for name in names:
        found.extend(bank.pattern(name).finditer(text))
    return sorted(found, key=lambda match: match.start())


def _extract_score(text: str, bank: TemplateBank, form: Optional[str], m: Optional[int],
                   diagnostics: List[Tuple[str, str]]) -> Optional[ScoreValue]:
    matches = _score_matches(text, bank, form)
    if not matches:
        diagnostics.append(("score", MISSING))
        return None
    if len(matches) > 1:
        diagnostics.append(("score", MULTIPLE_SCORE))
    token = matches[-1].group("score")
    digits = m if m is not None else sum(c.isdigit() for c in token)
    try:
        return parse_score(token, digits)
    except (ScoreParseError, DomainError) as e:
        logger.debug(f"Score token {token!r} rejected: {e}")
        diagnostics.append(("score", BAD_SCORE))
        return None


def _take_attribute(parsed: ParsedResponse, field_name: str, value: str) -> None:
    if field_name == "subject":
        parsed.subject = value
        return
    try:
        parsed.attributes[field_name] = encode_label(field_name, value)
    except EnumeratedValueError:
        parsed.diagnostics.append((field_name, BAD_LABEL))


def _key_value_attributes(text: str, bank: TemplateBank, parsed: ParsedResponse) -> None:
    final = bank.pattern("q3r3.final")
    for match in _KEY_VALUE_LINE.finditer(text):
        if final.search(match.group(0)):
            continue
        key = " ".join(match.group("key").split()).lower()
        field_name = _FIELD_BY_NAME.get(key)
        if field_name is None:
            parsed.diagnostics.append((match.group("key").strip(), UNKNOWN_ATTRIBUTE))
            continue
        _take_attribute(parsed, field_name, match.group("value"))


def _prose_attributes(text: str, bank: TemplateBank, parsed: ParsedResponse) -> None:
    for field_name in DISPLAY_NAMES:
        name = f"q2r2.{field_name}"
        if not bank.has(name):
            continue
        found = list(bank.pattern(name).finditer(text))
        if found:
            _take_attribute(parsed, field_name, found[-1].group("value"))


def parse_response(text: str, expected_form: Optional[str] = None, m: Optional[int] = None,
                   bank: Optional[TemplateBank] = None) -> ParsedResponse:
    """Extract the score and any attributes from a response.

    With several score statements the last one wins. `m` fixes the digit
    count; without it the count is read off the score token.
    """
    if expected_form is not None and expected_form not in STAGE2_FORMS:
        raise UsageError(f"expected form must be one of {STAGE2_FORMS}, got {expected_form!r}")
    bank = bank or load_bank()
    parsed = ParsedResponse()
    parsed.score = _extract_score(text, bank, expected_form, m, parsed.diagnostics)

    if expected_form in (Q3R3, None):
        _key_value_attributes(text, bank, parsed)
    if expected_form == Q2R2:
        _prose_attributes(text, bank, parsed)
    if expected_form in (Q2R2, Q3R3):
        for name in CODED_FIELDS:
            if name not in parsed.attributes and (name, BAD_LABEL) not in parsed.diagnostics:
                parsed.diagnostics.append((name, MISSING))

    if parsed.score is None and (expected_form is not None or not parsed.attributes):
        raise ExtractionError(
            f"no score found in response (expected form {expected_form or 'any'})",
            parsed.diagnostics,
        )
    return parsed
