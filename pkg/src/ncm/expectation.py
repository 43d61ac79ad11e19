"""
Token-expectation metrics over per-digit logits.

Each predicted score is M rows of logits over the digit classes 0..9. The
expectation of a row is v . softmax(row); the score expectation weights row i
by 10^(1-i). NCM is the squared error of that expectation against the ground
truth; NCM* does the same with the ground-truth digit removed from the
numerator, probing where the off-target mass sits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from ..score.grid import ScoreValue
from ..shared.errors import DomainError, UsageError

logger = logging.getLogger(__name__)

DIGITS = np.arange(10, dtype=float)


def digit_weights(m: int) -> np.ndarray:
    """(1, 0.1, ..., 10^(1-m))"""
    return 10.0 ** -np.arange(m, dtype=float)


@dataclass(frozen=True, eq=False)
class DigitLogitSeq:
    logits: np.ndarray
    gt: ScoreValue

    def __post_init__(self) -> None:
        z = np.array(self.logits, dtype=float)
        if z.shape != (self.gt.m, 10):
            raise UsageError(f"logits must be {self.gt.m}x10 for gt {self.gt}, got shape {z.shape}")
        if not np.all(np.isfinite(z)):
            raise DomainError("logits contain non-finite values")
        z.setflags(write=False)
        object.__setattr__(self, "logits", z)

    @property
    def m(self) -> int:
        return self.gt.m

    @property
    def gt_digits(self) -> np.ndarray:
        return np.asarray(self.gt.digits, dtype=int)


def _check_row(row: Sequence[float]) -> np.ndarray:
    z = np.asarray(row, dtype=float)
    if z.shape != (10,):
        raise UsageError(f"a digit row needs 10 logits, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("logits contain non-finite values")
    return z


def digit_expectation(row: Sequence[float]) -> float:
    # scipy's softmax subtracts the row max before exponentiating
    return float(DIGITS @ softmax(_check_row(row)))


def score_expectation(seq: DigitLogitSeq) -> float:
    return float(digit_weights(seq.m) @ (softmax(seq.logits, axis=-1) @ DIGITS))


def _masked_row_expectations(z: np.ndarray, g: np.ndarray, renormalized: bool) -> np.ndarray:
    """Per-row expectation with the GT digit left out of the numerator.

    `z` has shape (..., 10) and `g` the matching (...) integer GT digits.
    The printed form keeps the full denominator; `renormalized` masks it too.
    """
    hit = DIGITS.astype(int) == g[..., None]
    if renormalized:
        p = softmax(np.where(hit, -np.inf, z), axis=-1)
    else:
        p = np.where(hit, 0.0, softmax(z, axis=-1))
    return p @ DIGITS


def masked_expectation(seq: DigitLogitSeq, renormalized: bool = False) -> float:
    rows = _masked_row_expectations(seq.logits, seq.gt_digits, renormalized)
    return float(digit_weights(seq.m) @ rows)


def cross_entropy(seq: DigitLogitSeq) -> float:
    """Sum of -log p(gt digit) over the M digit positions; '.' is not a position"""
    logp = log_softmax(seq.logits, axis=-1)
    return float(-logp[np.arange(seq.m), seq.gt_digits].sum())


@dataclass
class _Stacked:
    logits: np.ndarray  # (n, m, 10)
    gt_digits: np.ndarray  # (n, m)
    gt_values: np.ndarray  # (n,)
    weights: np.ndarray  # (m,)


def _from_arrays(logits: np.ndarray, gt_digits: np.ndarray) -> _Stacked:
    z = np.asarray(logits, dtype=float)
    g = np.asarray(gt_digits)
    if z.ndim != 3 or z.shape[0] < 1 or z.shape[2] != 10:
        raise UsageError(f"logits must have shape (n, m, 10) with n >= 1, got {z.shape}")
    if g.shape != z.shape[:2]:
        raise UsageError(f"gt digits must have shape {z.shape[:2]}, got {g.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("logits contain non-finite values")
    if not np.issubdtype(g.dtype, np.integer) or g.min() < 0 or g.max() > 9:
        raise DomainError("gt digits must be integers in 0..9")
    weights = digit_weights(z.shape[1])
    return _Stacked(logits=z, gt_digits=g, gt_values=g @ weights, weights=weights)


def _stack(batch: Sequence[DigitLogitSeq]) -> _Stacked:
    if not batch:
        raise UsageError("metric batch is empty")
    ms = {seq.m for seq in batch}
    if len(ms) != 1:
        raise UsageError(f"batch mixes digit counts {sorted(ms)}")
    m = ms.pop()
    return _Stacked(
        logits=np.stack([seq.logits for seq in batch]),
        gt_digits=np.stack([seq.gt_digits for seq in batch]),
        gt_values=np.array([seq.gt.value for seq in batch], dtype=float),
        weights=digit_weights(m),
    )


def _expectations(s: _Stacked) -> np.ndarray:
    return (softmax(s.logits, axis=-1) @ DIGITS) @ s.weights


def _masked_expectations(s: _Stacked, renormalized: bool) -> np.ndarray:
    return _masked_row_expectations(s.logits, s.gt_digits, renormalized) @ s.weights


def _cross_entropies(s: _Stacked) -> np.ndarray:
    logp = log_softmax(s.logits, axis=-1)
    picked = np.take_along_axis(logp, s.gt_digits[..., None], axis=-1)[..., 0]
    return -picked.sum(axis=-1)


def ncm_per_sample(batch: Sequence[DigitLogitSeq]) -> np.ndarray:
    s = _stack(batch)
    return (_expectations(s) - s.gt_values) ** 2


def ncm_star_per_sample(batch: Sequence[DigitLogitSeq], renormalized: bool = False) -> np.ndarray:
    s = _stack(batch)
    return (_masked_expectations(s, renormalized) - s.gt_values) ** 2


def ncm(batch: Sequence[DigitLogitSeq]) -> float:
    return float(np.mean(ncm_per_sample(batch)))


def ncm_star(batch: Sequence[DigitLogitSeq], renormalized: bool = False) -> float:
    return float(np.mean(ncm_star_per_sample(batch, renormalized)))


@dataclass(frozen=True)
class MetricReport:
    """Batch means of the token-expectation metrics"""
    ncm: float
    ncm_star: float
    ce: float
    expectation: float
    expectation_star: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise UsageError("a metric report covers at least one sample")
        values = (self.ncm, self.ncm_star, self.ce, self.expectation, self.expectation_star)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("metric report holds non-finite values")

    def as_dict(self) -> Dict[str, Any]:
        return {
            "ncm": self.ncm,
            "ncm_star": self.ncm_star,
            "ce": self.ce,
            "expectation": self.expectation,
            "expectation_star": self.expectation_star,
            "n_samples": self.n_samples,
        }


def evaluate_batch(batch: Sequence[DigitLogitSeq], renormalized: bool = False) -> MetricReport:
    return _report(_stack(batch), renormalized)


def evaluate_arrays(logits: np.ndarray, gt_digits: np.ndarray, renormalized: bool = False) -> MetricReport:
    """evaluate_batch over raw (n, m, 10) logits and (n, m) GT digits"""
    return _report(_from_arrays(logits, gt_digits), renormalized)


def _report(s: _Stacked, renormalized: bool) -> MetricReport:
    expectation = _expectations(s)
    expectation_star = _masked_expectations(s, renormalized)
    return MetricReport(
        ncm=float(np.mean((expectation - s.gt_values) ** 2)),
        ncm_star=float(np.mean((expectation_star - s.gt_values) ** 2)),
        ce=float(np.mean(_cross_entropies(s))),
        expectation=float(np.mean(expectation)),
        expectation_star=float(np.mean(expectation_star)),
        n_samples=int(s.logits.shape[0]),
    )


@dataclass(frozen=True)
class AmbiguityReport:
    ce_a: float
    ce_b: float
    err_a: float
    err_b: float
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def inverted(self) -> bool:
        """CE prefers the numerically worse prediction"""
        return self.err_a < self.err_b and self.ce_a > self.ce_b


def saturated_seq(pred: ScoreValue, gt: ScoreValue, margin: float) -> DigitLogitSeq:
    """Logit `margin` on each digit of `pred`, 0 elsewhere, scored against `gt`"""
    z = np.zeros((pred.m, 10), dtype=float)
    z[np.arange(pred.m), list(pred.digits)] = margin
    return DigitLogitSeq(z, gt)


def _abs_error(a: ScoreValue, b: ScoreValue) -> float:
    return float(abs(a.decimal - b.decimal))


def ambiguity_demo(gt: ScoreValue, pred_a: ScoreValue, pred_b: ScoreValue,
                   margin: float) -> AmbiguityReport:
    """Token-level CE against numeric error for two confident predictions"""
    if not gt.m == pred_a.m == pred_b.m:
        raise UsageError(f"scores must share a digit count, got {gt.m}, {pred_a.m}, {pred_b.m}")
    if not margin > 0:
        raise UsageError(f"margin must be positive, got {margin}")
    mismatches: Tuple[int, int] = (
        sum(a != g for a, g in zip(pred_a.digits, gt.digits)),
        sum(b != g for b, g in zip(pred_b.digits, gt.digits)),
    )
    report = AmbiguityReport(
        ce_a=cross_entropy(saturated_seq(pred_a, gt, margin)),
        ce_b=cross_entropy(saturated_seq(pred_b, gt, margin)),
        err_a=_abs_error(pred_a, gt),
        err_b=_abs_error(pred_b, gt),
        details={"mismatched_positions": mismatches, "margin": margin},
    )
    logger.debug(f"Ambiguity demo gt={gt} a={pred_a} b={pred_b}: {report}")
    return report
