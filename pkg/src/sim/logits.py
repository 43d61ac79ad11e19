"""
Synthetic digit logits for two regimes of a score-emitting model.

NAIVE spreads the off-target mass evenly over the other nine digits, the way
a poorly converged model scatters its guesses. ADJACENT puts it on digits
near the ground truth (a discretized Gaussian over digit distance), the way a
well-trained model hesitates between 3 and its neighbours 2 and 4.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from ..ncm.expectation import DigitLogitSeq, MetricReport, evaluate_arrays
from ..score.grid import ScoreValue
from ..shared.errors import UsageError
from .rng import SEED_LIMIT, SeededRNG

logger = logging.getLogger(__name__)

NAIVE = "NAIVE"
ADJACENT = "ADJACENT"
PROFILE_KINDS = (NAIVE, ADJACENT)

GtSampler = Callable[[np.random.Generator, int], np.ndarray]

_DIGITS = np.arange(10)


@dataclass(frozen=True)
class SimProfile:
    kind: str
    on_gt_prob: float
    spread: float = 1.0
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise UsageError(f"profile kind must be one of {PROFILE_KINDS}, got {self.kind!r}")
        if not 0.0 < self.on_gt_prob < 1.0:
            raise UsageError(f"on_gt_prob must lie strictly inside (0, 1), got {self.on_gt_prob}")
        if not self.spread > 0:
            raise UsageError(f"spread must be positive, got {self.spread}")
        if not self.jitter >= 0:
            raise UsageError(f"jitter must be non-negative, got {self.jitter}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def digit_logits(kind: str, on_gt_prob: float, spread: float, gt_digits: np.ndarray,
                 jitter: float = 0.0, generator: Optional[np.random.Generator] = None) -> np.ndarray:
    """Log-probabilities of shape gt_digits.shape + (10,).

    The GT digit always receives exactly `on_gt_prob`; jitter perturbs how the
    remaining mass is shared among the other digits.
    """
    g = np.asarray(gt_digits, dtype=int)[..., None]
    off = _DIGITS != g
    if kind == NAIVE:
        log_shape = np.zeros(g.shape[:-1] + (10,))
    else:
        log_shape = -((_DIGITS - g) ** 2) / (2.0 * spread**2)
    if jitter > 0:
        if generator is None:
            raise UsageError("jitter needs a random generator")
        log_shape = log_shape + generator.normal(0.0, jitter, size=log_shape.shape)
    # normalise over the nine off-GT digits in log space; far digits never underflow
    log_shape = np.where(off, log_shape, -np.inf)
    log_off = log_shape - logsumexp(log_shape, axis=-1, keepdims=True)
    return np.where(off, math.log1p(-on_gt_prob) + log_off, math.log(on_gt_prob))


def sample_seq(profile: SimProfile, gt: ScoreValue) -> DigitLogitSeq:
    generator = SeededRNG(profile.seed).generator if profile.jitter > 0 else None
    z = digit_logits(profile.kind, profile.on_gt_prob, profile.spread,
                     np.asarray(gt.digits), profile.jitter, generator)
    return DigitLogitSeq(z, gt)


def uniform_grid_sampler(m: int) -> GtSampler:
    """GT scores drawn uniformly from the m-digit grid, as (n, m) digit arrays"""
    if m < 1:
        raise UsageError(f"digit count must be >= 1, got {m}")

    def sample(generator: np.random.Generator, n: int) -> np.ndarray:
        k = generator.integers(0, 10**m, size=n)
        return (k[:, None] // 10 ** np.arange(m - 1, -1, -1)) % 10

    return sample


def _lerp(a: float, b: float, frac: float) -> float:
    return a + (b - a) * frac


def profile_at(start: SimProfile, end: SimProfile, frac: float) -> SimProfile:
    return replace(
        start,
        on_gt_prob=_lerp(start.on_gt_prob, end.on_gt_prob, frac),
        spread=_lerp(start.spread, end.spread, frac),
        jitter=_lerp(start.jitter, end.jitter, frac),
    )


@dataclass(frozen=True)
class SimStep:
    step: int
    logits: np.ndarray
    gt_digits: np.ndarray


def iter_training(profile_start: SimProfile, profile_end: SimProfile, steps: int, batch: int,
                  gt_sampler: GtSampler, seed: int) -> Iterator[SimStep]:
    """Sampled logits per step; step i draws from its own forked stream"""
    if steps < 2:
        raise UsageError(f"steps must be >= 2, got {steps}")
    if batch < 1:
        raise UsageError(f"batch must be >= 1, got {batch}")
    if profile_start.kind != profile_end.kind:
        raise UsageError("start and end profiles must share a kind")
    root = SeededRNG(seed)
    for i in range(steps):
        profile = profile_at(profile_start, profile_end, i / (steps - 1))
        generator = root.fork(i).generator
        gts = np.asarray(gt_sampler(generator, batch), dtype=int)
        if gts.ndim != 2 or gts.shape[0] != batch:
            raise UsageError(f"gt sampler must return shape ({batch}, m), got {gts.shape}")
        z = digit_logits(profile.kind, profile.on_gt_prob, profile.spread, gts,
                         profile.jitter, generator)
        yield SimStep(step=i, logits=z, gt_digits=gts)


def emulate_training(profile_start: SimProfile, profile_end: SimProfile, steps: int, batch: int,
                     gt_sampler: GtSampler, seed: int,
                     renormalized: bool = False) -> List[Tuple[int, MetricReport]]:
    """Metric curve of a run whose profile moves linearly from start to end"""
    series = [
        (s.step, evaluate_arrays(s.logits, s.gt_digits, renormalized))
        for s in iter_training(profile_start, profile_end, steps, batch, gt_sampler, seed)
    ]
    logger.debug(
        f"Emulated {steps} steps of {profile_start.kind}: "
        f"CE {series[0][1].ce:.4f} -> {series[-1][1].ce:.4f}"
    )
    return series
