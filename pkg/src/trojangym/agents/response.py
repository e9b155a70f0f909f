"""Structured parsing of agent responses.

The response contract (see ``templates/response_format.txt``) is a labeled
layout: a Code section, three explanation lines (Insertion / Trigger /
Payload) and four taxonomy fields (Activation / Effects / Location /
Characteristics). Agents habitually wrap code in a fenced block, so code
extraction prefers the first fence and falls back to the labeled region.
A malformed response raises FormatError naming the missing section — that
error text is itself feedback material for the repair loop.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

__all__ = ["AgentResponse", "FormatError", "parse_response"]

EXPLANATION_FIELDS = ("insertion", "trigger", "payload")
TAXONOMY_FIELDS = ("activation", "effects", "location", "characteristics")


@dataclass(frozen=True)
class AgentResponse:
    raw: str
    code: str
    explanation: Dict[str, str]
    taxonomy: Dict[str, str]


class FormatError(ValueError):
    """E_FORMAT: the response deviates from the required layout."""

    def __init__(self, missing: str):
        super().__init__(f"response is missing the '{missing}' section")
        self.missing = missing


_FENCE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\n(.*?)```", re.DOTALL)
_LABELS = ("code",) + EXPLANATION_FIELDS + ("taxonomy",) + TAXONOMY_FIELDS
_LABEL_LINE = re.compile(
    r"^[ \t>*-]*(" + "|".join(_LABELS) + r")[ \t]*:[ \t]*(.*)$",
    re.IGNORECASE,
)


def _labeled_sections(text: str) -> Dict[str, str]:
    """First occurrence of each label, value running to the next label."""
    sections: Dict[str, List[str]] = {}
    current: List[Tuple[str, List[str]]] = []
    for line in text.splitlines():
        match = _LABEL_LINE.match(line)
        if match:
            name = match.group(1).lower()
            chunk: List[str] = [match.group(2)]
            current = [(name, chunk)]
            sections.setdefault(name, chunk)
        elif current:
            current[0][1].append(line)
    return {name: "\n".join(lines).strip() for name, lines in sections.items()}


def parse_response(raw: str) -> AgentResponse:
    """Extract code, explanation, and taxonomy; FormatError when absent.

    Code precedence: first non-empty fenced block, else the labeled
    ``Code:`` region. Labels are scanned with fenced regions removed, so
    Verilog comments can never masquerade as sections.
    """
    fences = _FENCE.findall(raw)
    prose = _FENCE.sub("\n", raw)
    sections = _labeled_sections(prose)

    code = ""
    for body in fences:
        if body.strip():
            code = body.strip("\n")
            break
    if not code:
        code = sections.get("code", "")
    if not code.strip():
        raise FormatError("code")

    explanation = {}
    present = [f for f in EXPLANATION_FIELDS if sections.get(f)]
    if not present:
        raise FormatError("explanation")
    for field in EXPLANATION_FIELDS:
        value = sections.get(field, "")
        if not value:
            raise FormatError(field)
        explanation[field] = value

    taxonomy = {}
    present = [f for f in TAXONOMY_FIELDS if sections.get(f)]
    if not present:
        raise FormatError("taxonomy")
    for field in TAXONOMY_FIELDS:
        value = sections.get(field, "")
        if not value:
            raise FormatError(field)
        taxonomy[field] = value

    return AgentResponse(raw=raw, code=code, explanation=explanation,
                         taxonomy=taxonomy)
