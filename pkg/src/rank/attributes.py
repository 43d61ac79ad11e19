"""
Fine-grained image attributes: option tables, ordinal coding, and
correlation of coded attributes against references.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from ..shared.errors import EnumeratedValueError, UndefinedCorrelationError, UsageError
from .correlation import PairedSeries, correlate, plcc

logger = logging.getLogger(__name__)

CLUTTER = ("cluttered", "moderately cluttered", "uncluttered")

# Option lists in annotation order; codes start at 1 in this order.
OPTIONS: Dict[str, Tuple[str, ...]] = {
    "subject_integrity": (
        "incomplete (mostly cut off or mostly obscured)",
        "partially complete (slightly cut off or slightly obscured)",
        "fully complete (no cuts or obstructions at all)",
    ),
    "subject_clutter": CLUTTER,
    "background_clutter": CLUTTER,
    "level_shot": ("no", "yes"),
    "image_clarity": ("very blurry", "moderately blurry", "moderately clear", "very clear"),
    "exposure": (
        "overexposed",
        "slightly overexposed",
        "properly exposed",
        "slightly underexposed",
        "underexposed",
    ),
    "saturation": (
        "ultra-low saturation",
        "low saturation",
        "medium saturation",
        "high saturation",
        "ultra-high saturation",
    ),
}

# Scored attributes take integer codes directly.
SCORED = {"eye_catching": (1, 10), "composition": (1, 10)}

# level_shot is binary: no=0, yes=1
CODE_BASE = {"level_shot": 0}

DISPLAY_NAMES: Dict[str, str] = {
    "eye_catching": "Eye-catching",
    "composition": "Composition",
    "subject": "Subject",
    "subject_integrity": "Subject integrity",
    "subject_clutter": "Subject clutter",
    "background_clutter": "Background clutter",
    "level_shot": "Level shot",
    "image_clarity": "Image clarity",
    "exposure": "Exposure",
    "saturation": "Saturation",
}

LEVELS: Dict[str, Tuple[str, ...]] = {
    "high": ("eye_catching", "composition"),
    "middle": ("subject", "subject_integrity", "subject_clutter", "background_clutter", "level_shot"),
    "low": ("image_clarity", "exposure", "saturation"),
}

HIGH_TO_LOW = "high-to-low"
LOW_TO_HIGH = "low-to-high"
LEVEL_ORDERS = (HIGH_TO_LOW, LOW_TO_HIGH)


@dataclass(frozen=True)
class AttributeVector:
    """Ordinal codes of the coded attributes, in annotation field order"""
    eye_catching: int
    composition: int
    subject_integrity: int
    subject_clutter: int
    background_clutter: int
    level_shot: int
    image_clarity: int
    exposure: int
    saturation: int

    def __post_init__(self) -> None:
        for name in CODED_FIELDS:
            low, high = code_range(name)
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or not low <= value <= high:
                raise EnumeratedValueError(name, value)

    def codes(self) -> List[int]:
        return [getattr(self, name) for name in CODED_FIELDS]

    def labels(self) -> Dict[str, str]:
        return {name: label_for(name, getattr(self, name)) for name in CODED_FIELDS}

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> "AttributeVector":
        if len(codes) != len(CODED_FIELDS):
            raise UsageError(f"expected {len(CODED_FIELDS)} codes, got {len(codes)}")
        return cls(**dict(zip(CODED_FIELDS, (int(c) for c in codes))))

    def as_dict(self) -> Dict[str, int]:
        return asdict(self)


CODED_FIELDS: Tuple[str, ...] = tuple(f.name for f in fields(AttributeVector))


def code_range(name: str) -> Tuple[int, int]:
    if name in SCORED:
        return SCORED[name]
    base = CODE_BASE.get(name, 1)
    return base, base + len(OPTIONS[name]) - 1


def label_for(name: str, code: int) -> str:
    """Canonical text for a code; scored attributes render as the number"""
    if name in SCORED:
        return str(code)
    return OPTIONS[name][code - CODE_BASE.get(name, 1)]


def _normalize_label(text: str) -> str:
    return " ".join(text.strip().lower().split())


def encode_label(name: str, raw: Any) -> int:
    """Code one attribute value; unknown labels raise with field and label"""
    if name in SCORED:
        low, high = SCORED[name]
        try:
            value = float(raw) if not isinstance(raw, bool) else float("nan")
        except (TypeError, ValueError):
            raise EnumeratedValueError(name, raw) from None
        if not value.is_integer() or not low <= value <= high:
            raise EnumeratedValueError(name, raw)
        return int(value)
    if name not in OPTIONS:
        raise UsageError(f"unknown attribute field '{name}'")
    if not isinstance(raw, str):
        raise EnumeratedValueError(name, raw)
    wanted = _normalize_label(raw)
    base = CODE_BASE.get(name, 1)
    for offset, option in enumerate(OPTIONS[name]):
        # the short head of a parenthesised option is accepted too
        if wanted in (option, option.split(" (")[0]):
            return base + offset
    raise EnumeratedValueError(name, raw)


def attribute_encode(raw: Mapping[str, Any]) -> AttributeVector:
    missing = [name for name in CODED_FIELDS if name not in raw]
    if missing:
        raise EnumeratedValueError(missing[0], "<missing>")
    return AttributeVector(**{name: encode_label(name, raw[name]) for name in CODED_FIELDS})


def ordered_attributes(level_order: str, include_subject: bool = True) -> List[str]:
    if level_order not in LEVEL_ORDERS:
        raise UsageError(f"level order must be one of {LEVEL_ORDERS}, got {level_order!r}")
    levels = ("high", "middle", "low") if level_order == HIGH_TO_LOW else ("low", "middle", "high")
    names = [name for level in levels for name in LEVELS[level]]
    return names if include_subject else [n for n in names if n != "subject"]


@dataclass(frozen=True)
class AttributeCorrelation:
    attribute: str
    srcc: Optional[float]
    plcc: Optional[float]

    @property
    def applicable(self) -> bool:
        return self.srcc is not None and self.plcc is not None


def per_attribute_corr(pred: Sequence[AttributeVector],
                       gt: Sequence[AttributeVector]) -> List[AttributeCorrelation]:
    """SRCC/PLCC per coded attribute; constant columns are N.A.

    A trailing `average` row averages the applicable attributes only.
    """
    if len(pred) != len(gt):
        raise UsageError(f"prediction and reference counts differ: {len(pred)} vs {len(gt)}")
    if len(pred) < 2:
        raise UsageError("per-attribute correlation needs at least two images")
    rows: List[AttributeCorrelation] = []
    for name in CODED_FIELDS:
        x = [getattr(v, name) for v in pred]
        y = [getattr(v, name) for v in gt]
        try:
            s, p = correlate(x, y)
        except UndefinedCorrelationError:
            logger.info(f"Attribute {name} has a constant column; reported as N.A.")
            rows.append(AttributeCorrelation(name, None, None))
            continue
        rows.append(AttributeCorrelation(name, s, p))
    applicable = [r for r in rows if r.applicable]
    if applicable:
        rows.append(AttributeCorrelation(
            "average",
            sum(r.srcc for r in applicable) / len(applicable),  # type: ignore[misc]
            sum(r.plcc for r in applicable) / len(applicable),  # type: ignore[misc]
        ))
    else:
        rows.append(AttributeCorrelation("average", None, None))
    return rows


@dataclass(frozen=True)
class MosRanking:
    top: List[Tuple[str, float]]
    skipped: List[str]


def attr_mos_ranking(attrs: Sequence[AttributeVector], mos: Sequence[float], k: int) -> MosRanking:
    """Pearson r of each coded attribute against MOS, strongest |r| first"""
    if len(attrs) != len(mos):
        raise UsageError(f"attribute and MOS counts differ: {len(attrs)} vs {len(mos)}")
    if k < 0:
        raise UsageError("k must be non-negative")
    scored: List[Tuple[str, float]] = []
    skipped: List[str] = []
    for name in CODED_FIELDS:
        column = [float(getattr(v, name)) for v in attrs]
        try:
            scored.append((name, plcc(PairedSeries(column, list(map(float, mos))))))
        except UndefinedCorrelationError:
            skipped.append(name)
    if skipped:
        logger.info(f"Skipped constant attribute columns: {', '.join(skipped)}")
    order = {name: i for i, name in enumerate(CODED_FIELDS)}
    scored.sort(key=lambda item: (-abs(item[1]), order[item[0]]))
    return MosRanking(top=scored[:k], skipped=skipped)
