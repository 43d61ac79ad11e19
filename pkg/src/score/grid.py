"""
Digit-grid scores: normalization of dataset scores, half-up quantization,
and the text form a model emits ("4", "3.98").
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation, localcontext
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..rank.correlation import PairedSeries, plcc, srcc
from ..shared.errors import (
    DomainError,
    ScoreParseError,
    SourceRangeError,
    UndefinedCorrelationError,
    UsageError,
)

logger = logging.getLogger(__name__)

_SCORE_PREFIX = re.compile(r"[0-9]+(?:\.[0-9]+)?")


def grid_max(m: int) -> float:
    """Largest representable score with m digits (9, 9.9, 9.99, ...)"""
    with localcontext() as ctx:
        ctx.prec = max(ctx.prec, m + 2)
        return float(Decimal(10) - Decimal(10) ** (1 - m))


def grid_step(m: int) -> Decimal:
    return Decimal(10) ** (1 - m)


@dataclass(frozen=True)
class ScoreValue:
    """A score on the m-digit grid, stored as its digit sequence"""
    digits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.digits) < 1:
            raise DomainError("a score needs at least one digit")
        for d in self.digits:
            if not isinstance(d, (int, np.integer)) or not 0 <= int(d) <= 9:
                raise DomainError(f"digit {d!r} outside 0..9")
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    @property
    def m(self) -> int:
        return len(self.digits)

    @property
    def decimal(self) -> Decimal:
        return Decimal(render(self))

    @property
    def value(self) -> float:
        return float(self.decimal)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class QuantizerConfig:
    m: int
    source_lo: float
    source_hi: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise UsageError(f"digit count must be >= 1, got {self.m}")
        if not self.source_hi > self.source_lo:
            raise UsageError(
                f"source_hi ({self.source_hi}) must exceed source_lo ({self.source_lo})"
            )


def normalize(raw: float, cfg: QuantizerConfig) -> float:
    """Affine map of [source_lo, source_hi] onto [0, grid_max(m)]"""
    if not math.isfinite(raw) or not cfg.source_lo <= raw <= cfg.source_hi:
        raise SourceRangeError(raw, cfg.source_lo, cfg.source_hi)
    span = cfg.source_hi - cfg.source_lo
    return (raw - cfg.source_lo) / span * grid_max(cfg.m)


def _to_decimal(s: float) -> Decimal:
    # shortest repr, so 3.9845 rounds as the decimal a reader sees
    try:
        return Decimal(repr(float(s)))
    except (InvalidOperation, ValueError) as e:
        raise DomainError(f"score {s!r} is not a finite number") from e


def _from_decimal(d: Decimal, m: int) -> ScoreValue:
    # the default context holds 28 digits; a grid point needs m of them
    with localcontext() as ctx:
        ctx.prec = max(ctx.prec, m + 2)
        q = d.quantize(grid_step(m), rounding=ROUND_HALF_UP)
    if q >= 10:
        raise DomainError(f"score {d} rounds to {q}, outside the {m}-digit grid")
    # pad so the tuple is exactly m digits: integer digit then m-1 decimals
    coefficient = "".join(str(x) for x in q.as_tuple().digits).rjust(m, "0")
    return ScoreValue(tuple(int(c) for c in coefficient[-m:]))


def quantize(s: float, m: int) -> ScoreValue:
    """Nearest m-digit grid point, ties rounded half-up"""
    if m < 1:
        raise UsageError(f"digit count must be >= 1, got {m}")
    if not 0 <= s < 10:
        raise DomainError(f"score {s!r} outside [0, 10)")
    return _from_decimal(_to_decimal(s), m)


def render(v: ScoreValue) -> str:
    head, *tail = v.digits
    if not tail:
        return str(head)
    return f"{head}." + "".join(str(d) for d in tail)


def parse_score(text: str, m: int) -> ScoreValue:
    """Inverse of render; finer precision than m is quantized half-up"""
    if m < 1:
        raise UsageError(f"digit count must be >= 1, got {m}")
    match = _SCORE_PREFIX.match(text)
    if match is None:
        raise ScoreParseError(text, 0, "expected a digit")
    if match.end() != len(text):
        offset = len(text[: match.end()].encode("utf-8"))
        raise ScoreParseError(text, offset)
    integer_part = match.group(0).split(".")[0]
    if len(integer_part) > 1:
        if int(integer_part) >= 10:
            raise DomainError(f"score {text!r} is not below 10")
        raise ScoreParseError(text, 1, "integer part must be a single digit")
    return _from_decimal(Decimal(text), m)


@dataclass(frozen=True)
class AblationRow:
    m: int
    mean_abs_error: float
    max_abs_error: float
    srcc: Optional[float]
    plcc: Optional[float]


def digit_ablation(raw_scores: Sequence[float], lo: float, hi: float,
                   ms: Sequence[int] = (1, 2, 3)) -> List[AblationRow]:
    """Quantization error and rank agreement for each digit count"""
    if len(raw_scores) < 2:
        raise UsageError("digit ablation needs at least two scores")
    rows: List[AblationRow] = []
    for m in ms:
        cfg = QuantizerConfig(m=m, source_lo=lo, source_hi=hi)
        exact = np.array([normalize(r, cfg) for r in raw_scores], dtype=float)
        grid = np.array([quantize(float(x), m).value for x in exact], dtype=float)
        errors = np.abs(grid - exact)
        series = PairedSeries(list(exact), list(grid))
        try:
            s, p = srcc(series), plcc(series)
        except UndefinedCorrelationError:
            # a coarse grid can collapse every score onto one point
            s = p = None
        rows.append(AblationRow(
            m=m,
            mean_abs_error=float(np.mean(errors)),
            max_abs_error=float(np.max(errors)),
            srcc=s,
            plcc=p,
        ))
        logger.debug(f"Digit ablation m={m}: mean error {rows[-1].mean_abs_error:.6f}")
    return rows

