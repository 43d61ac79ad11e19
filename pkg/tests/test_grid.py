"""
Tests for digit-grid scores.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.score.grid import (
    QuantizerConfig,
    ScoreValue,
    digit_ablation,
    grid_max,
    normalize,
    parse_score,
    quantize,
    render,
)
from src.shared.errors import DomainError, ScoreParseError, SourceRangeError, UsageError

grid_scores = st.integers(min_value=1, max_value=4).flatmap(
    lambda m: st.tuples(*[st.integers(0, 9)] * m).map(ScoreValue)
)


class TestNormalize:
    """Affine map of a dataset range onto the grid range"""

    def test_endpoints(self):
        cfg = QuantizerConfig(m=3, source_lo=1.0, source_hi=5.0)
        assert normalize(1.0, cfg) == 0.0
        assert normalize(5.0, cfg) == pytest.approx(9.99)

    def test_midpoint(self):
        """raw=5 on 0..10 lands at half the grid maximum"""
        cfg = QuantizerConfig(m=3, source_lo=0.0, source_hi=10.0)
        assert normalize(5.0, cfg) == pytest.approx(4.995)

    def test_out_of_range_names_value(self):
        cfg = QuantizerConfig(m=3, source_lo=0.0, source_hi=100.0)
        with pytest.raises(SourceRangeError) as exc:
            normalize(100.5, cfg)
        assert exc.value.value == 100.5
        assert "100.5" in str(exc.value)

    def test_invalid_config(self):
        with pytest.raises(UsageError):
            QuantizerConfig(m=3, source_lo=5.0, source_hi=5.0)
        with pytest.raises(UsageError):
            QuantizerConfig(m=0, source_lo=0.0, source_hi=1.0)

    @given(st.floats(0, 100), st.floats(0, 100))
    def test_order_preserving(self, a, b):
        cfg = QuantizerConfig(m=3, source_lo=0.0, source_hi=100.0)
        if a <= b:
            assert normalize(a, cfg) <= normalize(b, cfg)

    def test_grid_max(self):
        assert grid_max(1) == 9.0
        assert grid_max(3) == pytest.approx(9.99)


class TestQuantize:
    """Half-up rounding onto the m-digit grid"""

    def test_worked_example(self):
        assert render(quantize(3.9845, 2)) == "4.0"
        assert render(quantize(3.9845, 3)) == "3.98"
        assert quantize(3.9845, 2).value == 4.0
        assert quantize(3.9845, 3).value == 3.98

    def test_zero(self):
        v = quantize(0.0, 3)
        assert v.digits == (0, 0, 0)
        assert render(v) == "0.00"

    def test_half_up_tie(self):
        assert render(quantize(2.25, 2)) == "2.3"
        assert render(quantize(0.5, 1)) == "1"

    def test_digits_populated(self):
        v = quantize(3.98, 3)
        assert v.digits == (3, 9, 8)
        assert v.m == 3

    def test_domain(self):
        for bad in (10.0, -0.1, float("nan")):
            with pytest.raises(DomainError):
                quantize(bad, 3)

    def test_rounding_past_grid_top(self):
        with pytest.raises(DomainError):
            quantize(9.996, 3)

    @pytest.mark.parametrize("m", [28, 29, 30, 60])
    def test_more_digits_than_decimal_context(self, m):
        q = quantize(3.98, m)
        assert q.digits == (3, 9, 8) + (0,) * (m - 3)
        assert render(q).startswith("3.980")

    @given(st.floats(0, 9.49, allow_nan=False), st.integers(1, 4))
    def test_idempotent(self, s, m):
        q = quantize(s, m)
        assert quantize(q.value, m) == q

    @given(st.floats(0, 9.49, allow_nan=False), st.floats(0, 9.49, allow_nan=False), st.integers(1, 4))
    def test_monotone(self, a, b, m):
        lo, hi = min(a, b), max(a, b)
        assert quantize(lo, m).value <= quantize(hi, m).value

    @given(st.floats(0, 9.49, allow_nan=False), st.integers(1, 4))
    def test_error_bound(self, s, m):
        assert abs(quantize(s, m).value - s) <= 0.5 * 10 ** (1 - m) + 1e-12


class TestRenderParse:
    """Text form of a grid score"""

    def test_render_forms(self):
        assert render(ScoreValue((4,))) == "4"
        assert render(ScoreValue((3, 9, 8))) == "3.98"
        assert render(ScoreValue((9, 9, 9))) == "9.99"
        assert str(ScoreValue((7, 0))) == "7.0"

    def test_parse(self):
        assert parse_score("3.98", 3) == ScoreValue((3, 9, 8))
        assert parse_score("4", 1) == ScoreValue((4,))
        assert parse_score("3.987", 3) == ScoreValue((3, 9, 9))

    def test_parse_many_digits(self):
        text = "1." + "2" * 39 + "5"
        assert parse_score(text, 40).digits == (1,) + (2,) * 38 + (3,)

    def test_parse_pads_coarser_text(self):
        assert parse_score("4", 3) == ScoreValue((4, 0, 0))

    def test_parse_error_offset(self):
        with pytest.raises(ScoreParseError) as exc:
            parse_score("3.9x", 3)
        assert exc.value.offset == 3
        with pytest.raises(ScoreParseError) as exc:
            parse_score("abc", 3)
        assert exc.value.offset == 0

    def test_parse_out_of_domain(self):
        with pytest.raises(DomainError):
            parse_score("10.5", 3)

    def test_invalid_digit(self):
        with pytest.raises(DomainError):
            ScoreValue((3, 10))

    @given(grid_scores)
    @settings(max_examples=300)
    def test_round_trip(self, v):
        assert parse_score(render(v), v.m) == v


class TestDigitAblation:
    """Quantization error per digit count"""

    def test_error_shrinks_with_digits(self):
        raw = [12.3, 45.6, 78.9, 33.3, 91.2, 5.5, 64.1]
        rows = digit_ablation(raw, 0.0, 100.0, ms=(1, 2, 3))
        assert [r.m for r in rows] == [1, 2, 3]
        assert rows[0].max_abs_error <= 0.5
        assert rows[2].max_abs_error <= 0.005 + 1e-12
        assert rows[0].mean_abs_error >= rows[2].mean_abs_error
        assert rows[2].srcc == pytest.approx(1.0)

    def test_collapsed_grid_reports_na(self):
        rows = digit_ablation([50.0, 50.1], 0.0, 100.0, ms=(1,))
        assert rows[0].srcc is None and rows[0].plcc is None
