"""
Exception hierarchy for the scoring toolkit.
"""

from __future__ import annotations

from typing import List, Optional, Tuple


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(ToolkitError, ValueError):
    """A value lies outside the domain an operation accepts"""


class SourceRangeError(DomainError):
    """Raw score outside the declared source dataset range"""

    def __init__(self, value: float, lo: float, hi: float):
        super().__init__(f"raw score {value!r} outside source range [{lo}, {hi}]")
        self.value = value
        self.lo = lo
        self.hi = hi


class ScoreParseError(ToolkitError, ValueError):
    """Score text does not follow the digit-grid grammar"""

    def __init__(self, text: str, offset: int, reason: str = "unexpected character"):
        super().__init__(f"cannot parse score {text!r} at byte {offset}: {reason}")
        self.text = text
        self.offset = offset


class UsageError(ToolkitError, ValueError):
    """An operation was called against its contract"""


class EnumeratedValueError(ToolkitError, ValueError):
    """Attribute label not among the declared options"""

    def __init__(self, field: str, label: object):
        super().__init__(f"unknown label {label!r} for attribute '{field}'")
        self.field = field
        self.label = label


class UndefinedCorrelationError(ToolkitError, ValueError):
    """Correlation requested on a constant series"""


class BuildError(ToolkitError):
    """Conversation builder input is incomplete"""

    def __init__(self, field: str, message: Optional[str] = None):
        super().__init__(message or f"record is missing attribute '{field}'")
        self.field = field


class ExtractionError(ToolkitError):
    """A response did not contain the score its form requires"""

    def __init__(self, message: str, diagnostics: List[Tuple[str, str]]):
        super().__init__(message)
        self.diagnostics = diagnostics


class FitError(ToolkitError):
    """PLS could not extract the requested number of components"""

    def __init__(self, requested: int, achieved: int):
        super().__init__(
            f"requested {requested} PLS components but only {achieved} are achievable"
        )
        self.requested = requested
        self.achieved = achieved


class RecordError(ToolkitError):
    """Malformed input line"""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message
