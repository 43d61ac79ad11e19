"""
Tests for the seeded logit simulator and emulated training curves.
"""

import numpy as np
import pytest
from scipy.special import softmax

from src.ncm.curves import curve_report
from src.ncm.expectation import evaluate_arrays
from src.score.grid import parse_score
from src.shared.errors import UsageError
from src.sim.logits import (
    ADJACENT,
    NAIVE,
    SimProfile,
    digit_logits,
    emulate_training,
    iter_training,
    sample_seq,
    uniform_grid_sampler,
)
from src.sim.rng import SeededRNG


class TestSeededRng:
    """Counter-based streams keyed by seed and path"""

    def test_reproducible(self):
        a = SeededRNG(42).fork(3).generator.random(5)
        b = SeededRNG(42).fork(3).generator.random(5)
        np.testing.assert_array_equal(a, b)

    def test_forks_differ(self):
        root = SeededRNG(42)
        assert not np.array_equal(root.fork(0).generator.random(5), root.fork(1).generator.random(5))

    def test_fork_order_does_not_matter(self):
        first = SeededRNG(7)
        first.fork(1).generator.random(100)
        late = first.fork(2).generator.random(3)
        np.testing.assert_array_equal(late, SeededRNG(7).fork(2).generator.random(3))

    def test_seed_range(self):
        with pytest.raises(UsageError):
            SeededRNG(-1)
        with pytest.raises(UsageError):
            SeededRNG(2**64)


class TestDigitLogits:
    """Per-digit distributions for the two regimes"""

    @pytest.mark.parametrize("kind", [NAIVE, ADJACENT])
    def test_gt_probability_is_exact(self, kind):
        gts = np.array([[0, 4, 9]])
        p = softmax(digit_logits(kind, 0.37, 0.8, gts), axis=-1)
        assert p.shape == (1, 3, 10)
        np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-12)
        np.testing.assert_allclose(p[0, [0, 1, 2], [0, 4, 9]], 0.37, atol=1e-12)

    def test_naive_is_flat_off_target(self):
        p = softmax(digit_logits(NAIVE, 0.1, 1.0, np.array([3])), axis=-1)[0]
        off = np.delete(p, 3)
        np.testing.assert_allclose(off, 0.9 / 9, atol=1e-12)

    def test_adjacent_prefers_neighbours(self):
        p = softmax(digit_logits(ADJACENT, 0.1, 1.0, np.array([5])), axis=-1)[0]
        assert p[4] == pytest.approx(p[6])
        assert p[4] > p[3] > p[2]
        assert p[9] < 1e-3

    def test_jitter_needs_generator(self):
        with pytest.raises(UsageError):
            digit_logits(NAIVE, 0.5, 1.0, np.array([1]), jitter=0.5)

    def test_jitter_keeps_gt_probability(self):
        generator = SeededRNG(3).generator
        z = digit_logits(ADJACENT, 0.6, 1.0, np.array([[2, 7]]), jitter=0.5, generator=generator)
        p = softmax(z, axis=-1)
        np.testing.assert_allclose(p[0, [0, 1], [2, 7]], 0.6, atol=1e-12)

    def test_sample_seq(self):
        seq = sample_seq(SimProfile(ADJACENT, 0.5, seed=9, jitter=0.2), parse_score("3.98", 3))
        again = sample_seq(SimProfile(ADJACENT, 0.5, seed=9, jitter=0.2), parse_score("3.98", 3))
        assert seq.logits.shape == (3, 10)
        np.testing.assert_array_equal(seq.logits, again.logits)


class TestSimProfile:
    """Profile validation"""

    @pytest.mark.parametrize("kwargs", [
        {"kind": "WILD", "on_gt_prob": 0.5},
        {"kind": NAIVE, "on_gt_prob": 0.0},
        {"kind": NAIVE, "on_gt_prob": 1.0},
        {"kind": ADJACENT, "on_gt_prob": 0.5, "spread": 0.0},
        {"kind": ADJACENT, "on_gt_prob": 0.5, "jitter": -0.1},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(UsageError):
            SimProfile(**kwargs)


class TestSeparation:
    """Adjacent off-target mass scores better on NCM* than flat mass"""

    @pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
    def test_adjacent_beats_naive(self, p):
        generator = SeededRNG(2024).fork(int(p * 10)).generator
        gts = uniform_grid_sampler(3)(generator, 1000)
        naive = evaluate_arrays(digit_logits(NAIVE, p, 1.0, gts), gts)
        adjacent = evaluate_arrays(digit_logits(ADJACENT, p, 1.0, gts), gts)
        assert adjacent.ncm_star < naive.ncm_star
        assert adjacent.ce == pytest.approx(naive.ce)


class TestEmulatedTraining:
    """Convergence-ratio sign pattern of the two regimes"""

    def test_naive_run(self):
        series = emulate_training(
            SimProfile(NAIVE, 0.15), SimProfile(NAIVE, 0.9),
            steps=200, batch=256, gt_sampler=uniform_grid_sampler(3), seed=1,
        )
        report = curve_report(series, window=50)
        assert report.get("ce").ratio < 0
        assert report.get("ncm").ratio < 0
        assert report.get("ncm_star").ratio >= -5.0

    def test_adjacent_run(self):
        """Renormalized NCM* falls along with NCM and CE once neighbours hold the off-target mass"""
        series = emulate_training(
            SimProfile(ADJACENT, 0.3, spread=1.0), SimProfile(ADJACENT, 0.9, spread=0.6),
            steps=200, batch=256, gt_sampler=uniform_grid_sampler(3), seed=1, renormalized=True,
        )
        report = curve_report(series, window=50)
        for metric in ("ncm", "ncm_star", "ce"):
            assert report.get(metric).ratio < 0

    def test_deterministic(self):
        args = (SimProfile(ADJACENT, 0.3), SimProfile(ADJACENT, 0.9), 5, 8, uniform_grid_sampler(2), 4)
        a = emulate_training(*args)
        b = emulate_training(*args)
        assert [r.as_dict() for _, r in a] == [r.as_dict() for _, r in b]

    def test_steps_are_sorted(self):
        steps = [s.step for s in iter_training(SimProfile(NAIVE, 0.2), SimProfile(NAIVE, 0.4), 4, 2,
                                               uniform_grid_sampler(1), 0)]
        assert steps == [0, 1, 2, 3]

    def test_bad_runs(self):
        sampler = uniform_grid_sampler(1)
        with pytest.raises(UsageError):
            list(iter_training(SimProfile(NAIVE, 0.2), SimProfile(NAIVE, 0.4), 1, 2, sampler, 0))
        with pytest.raises(UsageError):
            list(iter_training(SimProfile(NAIVE, 0.2), SimProfile(ADJACENT, 0.4), 3, 2, sampler, 0))
        with pytest.raises(UsageError):
            list(iter_training(SimProfile(NAIVE, 0.2), SimProfile(NAIVE, 0.4), 3, 0, sampler, 0))
