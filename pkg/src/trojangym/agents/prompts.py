"""Prompt construction for the three agent protocols.

Prompts are instantiated from plain-text template files with
``{{placeholder}}`` slots. The templates are data, not code: experiment
metadata pins them by content hash (``template_version``) so a corpus can
always be traced back to the exact prompt wording that produced it.
"""

from __future__ import annotations

import hashlib
import re
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from ..core import HtType

__all__ = [
    "PromptKind",
    "MissingContextError",
    "HT_INSTRUCTIONS",
    "render_prompt",
    "template_version",
    "default_template_dir",
]


class PromptKind(Enum):
    INITIAL = "initial"
    REPAIR = "repair"
    EVASION = "evasion"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.name


#: Per-type insertion instruction, one line each, inlined into the INITIAL
#: template. These are the product's attack taxonomy in imperative form.
HT_INSTRUCTIONS = {
    HtType.HT1: (
        "HT1: Insert a Trojan that changes the functionality of the design "
        "by subtly altering logic to produce incorrect results under "
        "specific conditions."
    ),
    HtType.HT2: (
        "HT2: Insert a Trojan that leaks information by designing a covert "
        "data transmission mechanism that activates upon detecting a "
        "specific signal pattern and ensure access to key internal signals."
    ),
    HtType.HT3: (
        "HT3: Insert a denial of service Trojan by introducing a condition "
        "that temporarily disables the module, triggered by a rare sequence "
        "of events."
    ),
    HtType.HT4: (
        "HT4: Insert a performance degradation Trojan by implementing a "
        "continuously running shift register or accumulator to increase "
        "power consumption without affecting primary functionality upon "
        "detecting a specific event."
    ),
}


class MissingContextError(KeyError):
    """E_MISSING_CONTEXT: a template slot has no value in the context."""

    def __init__(self, field: str):
        super().__init__(field)
        self.field = field

    def __str__(self) -> str:
        return f"prompt context is missing '{self.field}'"


_TEMPLATE_FILES = {
    PromptKind.INITIAL: "initial.txt",
    PromptKind.REPAIR: "repair.txt",
    PromptKind.EVASION: "evasion.txt",
}
_FORMAT_FILE = "response_format.txt"

_SLOT = re.compile(r"\{\{([a-z_]+)\}\}")


def default_template_dir() -> Path:
    return Path(__file__).resolve().parent / "templates"


def _read(template_dir: Optional[Path], name: str) -> str:
    root = Path(template_dir) if template_dir else default_template_dir()
    return (root / name).read_text(encoding="utf-8")


def template_version(template_dir: Optional[Path] = None) -> str:
    """Content hash (12 hex chars) over every template file, by name order."""
    digest = hashlib.sha256()
    names = sorted(_TEMPLATE_FILES.values()) + [_FORMAT_FILE]
    for name in sorted(names):
        digest.update(name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(_read(template_dir, name).encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()[:12]


def _normalize_diagnostics(value: Union[str, Sequence[object]]) -> str:
    if isinstance(value, str):
        return value
    return "\n".join(str(item) for item in value)


def render_prompt(
    kind: PromptKind,
    ctx: Mapping[str, object],
    template_dir: Optional[Path] = None,
) -> str:
    """Instantiate the template for ``kind`` from ``ctx``.

    Context keys by kind — INITIAL: ``ht``, ``clean_source``; REPAIR:
    ``diagnostics`` (text or a sequence rendered line-per-item),
    ``faulty_code``; EVASION: ``ht``, ``clean_source``, ``detected_code``,
    ``attempt_number``, ``detection_log``. Raises MissingContextError naming
    the first unfilled slot. Substitution is single-pass, so slots appearing
    inside substituted Verilog (replication braces look like ``{{``) are
    never re-expanded.
    """
    values = {}
    for key, value in ctx.items():
        if key == "ht":
            if not isinstance(value, HtType):
                raise TypeError(f"ctx['ht'] must be HtType, got {value!r}")
            values.setdefault("ht_instruction", HT_INSTRUCTIONS[value])
            values.setdefault("ht_description", value.description)
        elif key == "diagnostics":
            values["diagnostics"] = _normalize_diagnostics(value)
        else:
            values[key] = str(value)
    values["response_format"] = _read(template_dir, _FORMAT_FILE).rstrip("\n")

    template = _read(template_dir, _TEMPLATE_FILES[kind])

    def fill(match: "re.Match[str]") -> str:
        name = match.group(1)
        if name not in values:
            raise MissingContextError(name)
        return values[name]

    return _SLOT.sub(fill, template)
