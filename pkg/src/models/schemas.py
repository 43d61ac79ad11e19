from __future__ import annotations

import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..score.grid import ScoreValue, parse_score

StageTwoForm = Literal["Q1R1", "Q2R2", "Q3R3"]
Role = Literal["system", "user", "assistant"]


class LogitRecord(BaseModel):
    """Exported digit logits for one predicted score"""
    id: str = Field(..., min_length=1)
    gt: str = Field(..., description="Ground-truth score in rendered form, e.g. 3.98")
    m: int = Field(..., ge=1, description="Digit count")
    logits: List[List[float]] = Field(..., description="m rows of 10 digit logits")
    step: Optional[int] = Field(None, ge=0, description="Training step the logits come from")

    @field_validator("logits")
    @classmethod
    def validate_logits(cls, v: List[List[float]]) -> List[List[float]]:
        for row in v:
            if len(row) != 10:
                raise ValueError(f"each logit row needs 10 values, got {len(row)}")
            if not all(math.isfinite(x) for x in row):
                raise ValueError("logits must be finite")
        return v

    @model_validator(mode="after")
    def check_shape(self) -> "LogitRecord":
        if len(self.logits) != self.m:
            raise ValueError(f"expected {self.m} logit rows, got {len(self.logits)}")
        parse_score(self.gt, self.m)
        return self

    def gt_score(self) -> ScoreValue:
        return parse_score(self.gt, self.m)


class AttributeRecord(BaseModel):
    """One image's attribute labels; codes are assigned downstream"""
    id: str = Field(..., min_length=1)
    attributes: Dict[str, Any] = Field(default_factory=dict)
    subject: Optional[str] = Field(None, description="Free-text identified subject")
    reasons: Dict[str, str] = Field(default_factory=dict, description="Opaque rationale per attribute")
    mos: Optional[float] = None
    feedback: Optional[float] = Field(None, description="Application feedback target for PLS")


class MosRecord(BaseModel):
    id: str = Field(..., min_length=1)
    mos: float

    @field_validator("mos")
    @classmethod
    def validate_mos(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("mos must be finite")
        return v


class ScorePairRecord(BaseModel):
    id: Optional[str] = None
    pred: float
    mos: float


class SortTrialRecord(BaseModel):
    """Sorting trial; either the parsed `pred` list or the raw model `response`"""
    id: Optional[str] = None
    gt: List[float] = Field(..., min_length=1)
    pred: Optional[List[float]] = None
    response: Optional[str] = None
    prompt: Optional[str] = None

    @model_validator(mode="after")
    def check_prediction(self) -> "SortTrialRecord":
        if self.pred is None and self.response is None:
            raise ValueError("a trial needs either pred or response")
        return self


class ResponseRecord(BaseModel):
    id: str = Field(..., min_length=1)
    response: str
    form: Optional[StageTwoForm] = None


class Stage2Record(BaseModel):
    """Score-labelled record ready for stage-2 conversation building"""
    id: str = Field(..., min_length=1)
    score: str = Field(..., description="Grid score in rendered form")
    m: int = Field(3, ge=1)
    mos: Optional[float] = None
    attributes: Optional[Dict[str, Any]] = None
    subject: Optional[str] = None

    @model_validator(mode="after")
    def check_score(self) -> "Stage2Record":
        parse_score(self.score, self.m)
        return self

    def score_value(self) -> ScoreValue:
        return parse_score(self.score, self.m)


class Message(BaseModel):
    role: Role
    content: str


class ConversationMeta(BaseModel):
    template: str
    level_order: str


class ConversationRecord(BaseModel):
    id: str
    messages: List[Message]
    meta: ConversationMeta


class RescaleRange(BaseModel):
    lo: float
    hi: float

    @model_validator(mode="after")
    def check_range(self) -> "RescaleRange":
        if not self.hi > self.lo:
            raise ValueError("rescale hi must exceed lo")
        return self


class CompositeModelDocument(BaseModel):
    """Persisted PLS composite model"""
    model_config = ConfigDict(extra="forbid")

    weights: List[float]
    intercept: float
    k: int = Field(..., ge=1)
    x_means: List[float]
    y_mean: float
    rescale: Optional[RescaleRange] = None
    attribute_order: List[str]

    @model_validator(mode="after")
    def check_lengths(self) -> "CompositeModelDocument":
        p = len(self.attribute_order)
        if len(self.weights) != p or len(self.x_means) != p:
            raise ValueError("weights, x_means and attribute_order must have equal lengths")
        if self.k > p:
            raise ValueError(f"k={self.k} exceeds the {p} attributes")
        values = [*self.weights, *self.x_means, self.intercept, self.y_mean]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("model values must be finite")
        return self
