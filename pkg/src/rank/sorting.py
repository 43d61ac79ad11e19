"""
Numerical sorting trials: the accuracy / recall / hallucination metrics for a
model-emitted sorted list, plus trial generation and answer extraction.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..shared.errors import UsageError

logger = logging.getLogger(__name__)

SORT_PROMPT = (
    "Sort these numbers from low to high and return the result directly to me! "
    "Numbers: [{numbers}]. Return format: [number 1, number 2, ..., number n]"
)

_LIST_PATTERN = re.compile(r"\[([^\[\]]*)\]")
_NUMBER = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$")


@dataclass(frozen=True)
class SortTrial:
    gt: List[float]
    pred: List[float]

    def __post_init__(self) -> None:
        if not self.gt:
            raise UsageError("a sorting trial needs at least one ground-truth number")


@dataclass(frozen=True)
class SortMetrics:
    accuracy: float
    recall: float
    hallucination: float
    hallucination_defined: bool = True


def sort_metrics(t: SortTrial) -> SortMetrics:
    gt_set = set(t.gt)
    pred_set = set(t.pred)

    # first occurrence in pred of each reference element that pred contains,
    # walking the reference in its sorted order
    indices = [t.pred.index(x) for x in sorted(t.gt) if x in pred_set]
    ordered = all(a <= b for a, b in zip(indices, indices[1:]))
    accuracy = len(indices) / len(t.gt) if ordered else 0.0

    recall = len([x for x in t.gt if x in pred_set]) / len(t.gt)

    if not t.pred:
        return SortMetrics(accuracy, recall, 0.0, hallucination_defined=False)
    hallucination = len([x for x in t.pred if x not in gt_set]) / len(t.pred)
    return SortMetrics(accuracy, recall, hallucination)


@dataclass(frozen=True)
class SortSummary:
    trials: int
    accuracy: float
    recall: float
    hallucination: float
    undefined_hallucination: int


def mean_sort_metrics(results: Sequence[SortMetrics]) -> SortSummary:
    """Average over repeated trials; undefined hallucinations are left out of that mean"""
    if not results:
        raise UsageError("no sorting trials to average")
    defined = [r.hallucination for r in results if r.hallucination_defined]
    return SortSummary(
        trials=len(results),
        accuracy=float(np.mean([r.accuracy for r in results])),
        recall=float(np.mean([r.recall for r in results])),
        hallucination=float(np.mean(defined)) if defined else 0.0,
        undefined_hallucination=len(results) - len(defined),
    )


def generate_sort_numbers(rng: np.random.Generator, count: int = 10) -> List[float]:
    """Random numbers in [1, 10) carrying zero to two decimals (3, 3.8, 3.99)"""
    if count < 1:
        raise UsageError("count must be positive")
    places = rng.integers(0, 3, size=count)
    numbers: List[float] = []
    for p in places:
        step = 10 ** int(p)
        numbers.append(round(int(rng.integers(step, 10 * step)) / step, int(p)))
    return [float(x) for x in numbers]


def format_number(x: float) -> str:
    return repr(float(x))


def sort_prompt(numbers: Sequence[float]) -> str:
    return SORT_PROMPT.format(numbers=", ".join(format_number(x) for x in numbers))


def parse_sorted_answer(text: str) -> Optional[List[float]]:
    """Numbers of the last bracketed list in a response; None when absent"""
    found = _LIST_PATTERN.findall(text)
    if not found:
        return None
    values: List[float] = []
    for item in found[-1].split(","):
        token = item.strip()
        if not token:
            continue
        if not _NUMBER.match(token):
            logger.debug(f"Dropping non-numeric list item {token!r}")
            continue
        values.append(float(token))
    return values
