"""
Tests for the PLS composite score.
"""

import numpy as np
import pytest

from src.composite.pls import (
    CompositeModel,
    composite,
    composite_batch,
    fit_attributes,
    fit_pls,
    load_model,
    save_model,
)
from src.rank.attributes import CODED_FIELDS, AttributeVector, code_range
from src.score.grid import grid_max
from src.shared.errors import FitError, ToolkitError, UsageError


def _vectors(rng, n):
    return [
        AttributeVector.from_codes([int(rng.integers(lo, hi + 1)) for lo, hi in map(code_range, CODED_FIELDS)])
        for _ in range(n)
    ]


class TestFitPls:
    """NIPALS PLS1 fitting"""

    def test_full_components_match_least_squares(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            X = rng.normal(size=(50, 10))
            y = X @ rng.normal(size=10) + rng.normal()
            model = fit_pls(X, y, k=10)
            design = np.column_stack([np.ones(50), X])
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
            expected = design @ coef
            predicted = model.predict_raw(X)
            assert np.max(np.abs(predicted - expected)) <= 1e-6 * np.max(np.abs(expected))

    def test_single_feature_is_ols_slope(self):
        X = [[1.0], [2.0], [3.0], [4.0]]
        y = [3.0, 5.0, 7.0, 9.0]
        model = fit_pls(X, y, k=1)
        assert model.weights[0] == pytest.approx(2.0)
        assert model.intercept == pytest.approx(1.0)
        assert model.attribute_order == ("x1",)

    def test_k_above_rank(self, rng):
        X = rng.normal(size=(20, 3))
        X = np.column_stack([X, X[:, 0]])
        y = rng.normal(size=20)
        with pytest.raises(FitError) as exc:
            fit_pls(X, y, k=4)
        assert exc.value.requested == 4
        assert exc.value.achieved == 3

    def test_exact_response_with_duplicate_column(self, rng):
        X = rng.normal(size=(30, 3))
        X = np.column_stack([X, X[:, 0]])
        y = 2.0 * X[:, 0]
        model = fit_pls(X, y, k=4)
        np.testing.assert_allclose(model.predict_raw(X), y, atol=1e-8)
        assert model.components <= 3

    def test_noiseless_single_attribute(self, rng):
        X = rng.normal(size=(40, 10))
        model = fit_pls(X, 2.0 * X[:, 0], k=10)
        assert model.weights[0] == pytest.approx(2.0, abs=1e-8)
        np.testing.assert_allclose(model.weights[1:], 0.0, atol=1e-8)

    def test_two_rows_interpolated(self):
        X = [[1.0, 4.0, 0.0], [3.0, 1.0, 2.0]]
        y = [1.5, -2.0]
        model = fit_pls(X, y, k=1)
        np.testing.assert_allclose(model.predict_raw(np.asarray(X)), y, atol=1e-10)

    def test_training_mean_gives_y_mean(self, rng):
        X = rng.normal(size=(25, 5))
        y = rng.normal(size=25)
        model = fit_pls(X, y, k=3)
        assert composite(model, X.mean(axis=0), rescale=False) == pytest.approx(model.y_mean)
        assert model.y_mean == pytest.approx(y.mean())

    def test_row_order_does_not_matter(self, rng):
        X = rng.normal(size=(30, 6))
        y = X @ rng.normal(size=6) + rng.normal(0, 0.1, size=30)
        order = rng.permutation(30)
        a = fit_pls(X, y, k=3)
        b = fit_pls(X[order], y[order], k=3)
        fresh_rows = rng.normal(size=(10, 6))
        np.testing.assert_allclose(a.predict_raw(fresh_rows), b.predict_raw(fresh_rows), atol=1e-9)

    def test_constant_target(self, rng):
        X = rng.normal(size=(10, 4))
        model = fit_pls(X, [2.5] * 10, k=3)
        assert model.weights == (0.0, 0.0, 0.0, 0.0)
        assert model.intercept == pytest.approx(2.5)

    def test_input_checks(self):
        with pytest.raises(UsageError):
            fit_pls([[1.0, 2.0]], [1.0])
        with pytest.raises(UsageError):
            fit_pls([[1.0], [2.0]], [1.0, 2.0, 3.0])
        with pytest.raises(UsageError):
            fit_pls([[1.0], [float("nan")]], [1.0, 2.0])
        with pytest.raises(UsageError):
            fit_pls([[1.0], [2.0]], [1.0, 2.0], k=0)

    def test_fewer_components_still_fit_signal(self, rng):
        X = rng.normal(size=(200, 6))
        y = 3.0 * X[:, 0] - 2.0 * X[:, 1] + rng.normal(0, 0.05, size=200)
        model = fit_pls(X, y, k=2)
        residual = y - model.predict_raw(X)
        assert np.std(residual) < 0.5 * np.std(y)


class TestComposite:
    """Scoring attribute vectors with a fitted model"""

    @pytest.fixture
    def fitted(self, rng):
        vectors = _vectors(rng, 120)
        feedback = [0.6 * v.composition + 0.3 * v.image_clarity - 0.1 * v.exposure for v in vectors]
        return vectors, feedback, fit_attributes(vectors, feedback, k=3, rescale=True)

    def test_attribute_fit(self, fitted):
        vectors, feedback, model = fitted
        assert model.attribute_order == CODED_FIELDS
        raw = composite_batch(model, vectors, rescale=False)
        assert np.corrcoef(raw, feedback)[0, 1] > 0.99

    def test_rescaled_range(self, fitted):
        vectors, _, model = fitted
        scores = composite_batch(model, vectors)
        assert scores.min() == pytest.approx(0.0)
        assert scores.max() == pytest.approx(grid_max(3))

    def test_out_of_range_is_clipped(self, fitted):
        _, _, model = fitted
        top = AttributeVector(eye_catching=10, composition=10, subject_integrity=3, subject_clutter=3,
                              background_clutter=3, level_shot=1, image_clarity=4, exposure=1, saturation=5)
        assert 0.0 <= composite(model, top) <= grid_max(3)

    def test_positive_weight_is_monotone(self, fitted, rng):
        vectors, _, model = fitted
        for vector in vectors[:20]:
            x = np.asarray(vector.codes(), dtype=float)
            base = composite(model, x)
            for i, weight in enumerate(model.weights):
                if weight > 0:
                    bumped = x.copy()
                    bumped[i] += rng.uniform(0.1, 3.0)
                    assert composite(model, bumped) >= base
                    assert composite(model, bumped, rescale=False) >= composite(model, x, rescale=False)

    def test_rescale_needs_range(self, rng):
        model = fit_pls(rng.normal(size=(10, 9)), rng.normal(size=10), k=2)
        with pytest.raises(UsageError):
            composite(model, [0.0] * 9, rescale=True)

    def test_feature_count(self, fitted):
        with pytest.raises(UsageError):
            composite(fitted[2], [1.0, 2.0])

    def test_model_invariants(self):
        with pytest.raises(UsageError):
            CompositeModel(weights=(1.0,), intercept=0.0, components=1, x_means=(0.0, 0.0), y_mean=0.0,
                           attribute_order=("a", "b"))


class TestModelFile:
    """Saving and loading fitted models"""

    def test_save_and_load(self, rng, tmp_path):
        vectors = _vectors(rng, 40)
        model = fit_attributes(vectors, [float(v.composition) for v in vectors], k=2, rescale=True)
        path = tmp_path / "models" / "composite.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded == model
        assert composite(loaded, vectors[0]) == pytest.approx(composite(model, vectors[0]))

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_model(tmp_path / "absent.json")

    def test_invalid_document(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"weights": [1.0], "intercept": 0.0}', encoding="utf-8")
        with pytest.raises(ToolkitError):
            load_model(path)
