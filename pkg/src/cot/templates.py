"""
Template bank loading and filling.
"""

from __future__ import annotations

import logging
import re
import string
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Mapping, Optional, Pattern, Set

from ..shared.config import settings
from ..shared.errors import UsageError

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^==\s*(?P<name>[A-Za-z0-9_.]+)\s*==\s*$")
_SCORE_GROUP = r"(?P<score>[0-9]+(?:\.[0-9]+)?)"
_VALUE_GROUP = r"(?P<value>[^\n]+?)"


def placeholders(template: str) -> Set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(template) if name}


@dataclass(frozen=True)
class TemplateBank:
    entries: Dict[str, str]
    source: str = "<memory>"

    def get(self, name: str) -> str:
        try:
            return self.entries[name]
        except KeyError:
            raise UsageError(f"template '{name}' not found in bank {self.source}") from None

    def has(self, name: str) -> bool:
        return name in self.entries

    def fill(self, name: str, /, **values: object) -> str:
        template = self.get(name)
        missing = placeholders(template) - set(values)
        if missing:
            raise UsageError(f"template '{name}' needs values for {sorted(missing)}")
        return template.format(**values)

    def pattern(self, name: str, groups: Optional[Mapping[str, str]] = None) -> Pattern[str]:
        """Regex matching a filled template; each placeholder becomes a named group"""
        groups = {"score": _SCORE_GROUP, "value": _VALUE_GROUP, **(groups or {})}
        parts = []
        for literal, field_name, _, _ in string.Formatter().parse(self.get(name)):
            parts.append(re.escape(literal))
            if field_name:
                if field_name not in groups:
                    raise UsageError(f"template '{name}' placeholder '{field_name}' has no pattern")
                parts.append(groups[field_name])
        return re.compile("".join(parts))


def parse_bank(text: str, source: str = "<memory>") -> TemplateBank:
    entries: Dict[str, str] = {}
    current: Optional[str] = None
    body: list[str] = []

    def close() -> None:
        if current is not None:
            entries[current] = "\n".join(body).strip("\n")

    for line_no, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header:
            close()
            current = header.group("name")
            if current in entries:
                raise UsageError(f"{source}:{line_no}: duplicate template '{current}'")
            body = []
        elif current is None:
            if line.strip() and not line.lstrip().startswith("#"):
                raise UsageError(f"{source}:{line_no}: text before the first template header")
        else:
            body.append(line)
    close()
    logger.debug(f"Loaded {len(entries)} templates from {source}")
    return TemplateBank(entries, source)


@lru_cache(maxsize=8)
def load_bank(path: Optional[str] = None) -> TemplateBank:
    target = Path(path or settings.template_bank)
    try:
        text = target.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read template bank {target}: {e}") from e
    return parse_bank(text, str(target))
