"""
Composite score from coded attributes, weighted by single-response partial
least squares (NIPALS).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..models.schemas import CompositeModelDocument
from ..rank.attributes import CODED_FIELDS, AttributeVector
from ..score.grid import QuantizerConfig, normalize
from ..shared.config import settings
from ..shared.errors import FitError, ToolkitError, UsageError

logger = logging.getLogger(__name__)

# relative size below which a weight direction counts as zero
_TOL = 1e-12
_RESIDUAL_TOL = 1e-9

Features = Union[AttributeVector, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class CompositeModel:
    weights: Tuple[float, ...]
    intercept: float
    components: int
    x_means: Tuple[float, ...]
    y_mean: float
    attribute_order: Tuple[str, ...] = CODED_FIELDS
    rescale: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        p = len(self.attribute_order)
        if len(self.weights) != p or len(self.x_means) != p:
            raise UsageError("weights, x_means and attribute_order must align")
        if not 1 <= self.components <= p:
            raise UsageError(f"components must lie in 1..{p}, got {self.components}")
        values = (*self.weights, *self.x_means, self.intercept, self.y_mean)
        if not all(math.isfinite(v) for v in values):
            raise UsageError("model holds non-finite values")
        if self.rescale is not None and not self.rescale[1] > self.rescale[0]:
            raise UsageError("rescale range must have hi > lo")

    def predict_raw(self, x: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(x, dtype=float) @ np.asarray(self.weights)


def _design(X: Sequence[Sequence[float]], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    Xa = np.asarray(X, dtype=float)
    ya = np.asarray(y, dtype=float)
    if Xa.ndim != 2:
        raise UsageError(f"X must be a 2-d matrix, got shape {Xa.shape}")
    if ya.shape != (Xa.shape[0],):
        raise UsageError(f"y must hold one target per row of X ({Xa.shape[0]}), got shape {ya.shape}")
    if Xa.shape[0] < 2:
        raise UsageError("PLS needs at least two rows")
    if not (np.all(np.isfinite(Xa)) and np.all(np.isfinite(ya))):
        raise UsageError("X and y must be finite")
    return Xa, ya


def fit_pls(X: Sequence[Sequence[float]], y: Sequence[float], k: int = settings.pls_components,
            rescale: bool = False, attribute_order: Optional[Sequence[str]] = None) -> CompositeModel:
    """PLS1 regression of y on X with k latent components.

    Stops early once the response is fully explained. Raises FitError when the
    deflated X runs out of directions while response variance remains.
    """
    Xa, ya = _design(X, y)
    n, p = Xa.shape
    if attribute_order is None:
        attribute_order = CODED_FIELDS if p == len(CODED_FIELDS) else tuple(f"x{i + 1}" for i in range(p))
    if len(attribute_order) != p:
        raise UsageError(f"attribute_order names {len(attribute_order)} columns, X has {p}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")

    x_means = Xa.mean(axis=0)
    y_mean = float(ya.mean())
    Xc = Xa - x_means
    yc = ya - y_mean

    scale = max(float(np.linalg.norm(Xc)) * float(np.linalg.norm(yc)), 1.0)
    y_norm = float(np.linalg.norm(yc))
    W, P, q = [], [], []
    Xr, yr = Xc.copy(), yc.copy()
    for _ in range(k):
        c = Xr.T @ yr
        c_norm = float(np.linalg.norm(c))
        if c_norm <= _TOL * scale:
            if float(np.linalg.norm(yr)) > _RESIDUAL_TOL * y_norm:
                raise FitError(k, len(W))
            break
        w = c / c_norm
        t = Xr @ w
        tt = float(t @ t)
        p_load = Xr.T @ t / tt
        q_load = float(yr @ t) / tt
        Xr = Xr - np.outer(t, p_load)
        yr = yr - q_load * t
        W.append(w)
        P.append(p_load)
        q.append(q_load)

    if W:
        Wm = np.column_stack(W)
        Pm = np.column_stack(P)
        B = Wm @ np.linalg.solve(Pm.T @ Wm, np.asarray(q))
    else:
        logger.info("Response is constant; composite weights are all zero")
        B = np.zeros(p)
    if len(W) < k:
        logger.debug(f"PLS stopped after {len(W)} of {k} components; response fully explained")

    intercept = y_mean - float(x_means @ B)
    rescale_range: Optional[Tuple[float, float]] = None
    if rescale:
        fitted = intercept + Xa @ B
        lo, hi = float(fitted.min()), float(fitted.max())
        if hi > lo:
            rescale_range = (lo, hi)
        else:
            logger.warning("Training composites are constant; rescaling disabled")

    return CompositeModel(
        weights=tuple(float(b) for b in B),
        intercept=intercept,
        components=max(len(W), 1),
        x_means=tuple(float(v) for v in x_means),
        y_mean=y_mean,
        attribute_order=tuple(attribute_order),
        rescale=rescale_range,
    )


def fit_attributes(vectors: Sequence[AttributeVector], targets: Sequence[float],
                   k: int = settings.pls_components, rescale: bool = False) -> CompositeModel:
    return fit_pls([v.codes() for v in vectors], targets, k, rescale=rescale, attribute_order=CODED_FIELDS)


def _features(model: CompositeModel, a: Features) -> np.ndarray:
    x = np.asarray(a.codes() if isinstance(a, AttributeVector) else a, dtype=float)
    if x.shape != (len(model.attribute_order),):
        raise UsageError(f"expected {len(model.attribute_order)} features, got shape {x.shape}")
    return x


def _rescaled(model: CompositeModel, value: float) -> float:
    if model.rescale is None:
        raise UsageError("model was fitted without a rescale range")
    lo, hi = model.rescale
    return normalize(min(max(value, lo), hi), QuantizerConfig(settings.digits, lo, hi))


def composite(model: CompositeModel, a: Features, rescale: Optional[bool] = None) -> float:
    """intercept + weights . codes; rescaled onto the score grid range when asked
    (None follows whether the model carries a rescale range). Out-of-range
    composites are clipped to the training range first."""
    value = float(model.predict_raw(_features(model, a)))
    use_rescale = model.rescale is not None if rescale is None else rescale
    return _rescaled(model, value) if use_rescale else value


def composite_batch(model: CompositeModel, vectors: Sequence[Features],
                    rescale: Optional[bool] = None) -> np.ndarray:
    return np.array([composite(model, a, rescale) for a in vectors], dtype=float)


def to_document(model: CompositeModel) -> CompositeModelDocument:
    return CompositeModelDocument(
        weights=list(model.weights),
        intercept=model.intercept,
        k=model.components,
        x_means=list(model.x_means),
        y_mean=model.y_mean,
        rescale=None if model.rescale is None else {"lo": model.rescale[0], "hi": model.rescale[1]},
        attribute_order=list(model.attribute_order),
    )


def save_model(model: CompositeModel, path: Path) -> None:
    out = Path(path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_document(model).model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_model(path: Path) -> CompositeModel:
    try:
        doc = CompositeModelDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"cannot read model {path}: {e}") from e
    except ValidationError as e:
        raise ToolkitError(f"invalid model document {path}: {e}") from e
    return CompositeModel(
        weights=tuple(doc.weights),
        intercept=doc.intercept,
        components=doc.k,
        x_means=tuple(doc.x_means),
        y_mean=doc.y_mean,
        attribute_order=tuple(doc.attribute_order),
        rescale=None if doc.rescale is None else (doc.rescale.lo, doc.rescale.hi),
    )
