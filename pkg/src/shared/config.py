from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import UsageError

BANK_PATH = Path(__file__).resolve().parent.parent / "cot" / "bank.txt"


@dataclass(frozen=True)
class Settings:
    # Score grid
    digits: int = 3

    # Training-curve windows (first/last N iterations)
    window: int = 100

    # Composite score
    pls_components: int = 3

    # Simulation and trial generation
    seed: int = 0
    sort_trials: int = 200
    sort_count: int = 10

    # Conversation building
    level_order: str = "high-to-low"
    template_bank: str = str(BANK_PATH)

    # Source dataset range; None means scores are already on [0, 10)
    source_lo: Optional[float] = None
    source_hi: Optional[float] = None


settings = Settings()


class RunConfig(BaseModel):
    """Values a --config document may set; every field is optional"""

    model_config = ConfigDict(extra="forbid")

    m: Optional[int] = Field(None, ge=1, description="Digit count")
    window: Optional[int] = Field(None, ge=1, description="Curve window length")
    seed: Optional[int] = Field(None, ge=0)
    k: Optional[int] = Field(None, ge=1, description="PLS components")
    lo: Optional[float] = Field(None, description="Source range lower bound")
    hi: Optional[float] = Field(None, description="Source range upper bound")
    level_order: Optional[str] = Field(None, pattern="^(high-to-low|low-to-high)$")
    template_bank: Optional[str] = None
    renormalized: Optional[bool] = None
    top_k: Optional[int] = Field(None, ge=0)

    @model_validator(mode="after")
    def check_range(self) -> "RunConfig":
        if self.lo is not None and self.hi is not None and self.hi <= self.lo:
            raise ValueError("hi must be greater than lo")
        return self

    def flags(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


def load_run_config(path: Path, commands: list[str]) -> Dict[str, Dict[str, Any]]:
    """Read a --config JSON file and turn it into a click default_map.

    Flat keys apply to every subcommand; an object keyed by a subcommand
    name applies to that subcommand only and wins over flat keys.
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    if not isinstance(document, dict):
        raise UsageError(f"config {path} must hold a JSON object")

    flat = {key: value for key, value in document.items() if key not in commands}
    try:
        shared = RunConfig.model_validate(flat).flags()
        default_map: Dict[str, Dict[str, Any]] = {}
        for command in commands:
            section = document.get(command, {})
            if not isinstance(section, dict):
                raise UsageError(f"config section '{command}' must be an object")
            default_map[command] = {**shared, **RunConfig.model_validate(section).flags()}
    except ValidationError as e:
        raise UsageError(f"invalid config {path}: {e}") from e
    return default_map
