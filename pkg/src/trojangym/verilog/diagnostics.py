"""Compiler-style diagnostics and the check report fed back to agents."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List


class Severity(Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


# machine tags; the set is closed so downstream prompt/report code can rely on it
E_LEX = "E_LEX"
E_PARSE = "E_PARSE"
E_UNDECLARED = "E_UNDECLARED"
E_REDECLARED = "E_REDECLARED"
E_WIDTH_MISMATCH = "E_WIDTH_MISMATCH"
E_UNBALANCED = "E_UNBALANCED"
E_NONSYNTH = "E_NONSYNTH"
E_UNSUPPORTED = "E_UNSUPPORTED"
E_NO_MODULE = "E_NO_MODULE"
E_FORMAT = "E_FORMAT"
E_INTERFACE = "E_INTERFACE"
E_EXTERNAL = "E_EXTERNAL"
W_WIDTH = "W_WIDTH"
W_UNUSED = "W_UNUSED"
W_EXTERNAL = "W_EXTERNAL"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    line: int
    column: int
    message: str

    def render(self) -> str:
        """One-line record: ``SEVERITY code line:col message``.

        This exact shape is embedded verbatim in repair prompts.
        """
        return f"{self.severity.value} {self.code} {self.line}:{self.column} {self.message}"


def sort_diagnostics(diags: List[Diagnostic]) -> List[Diagnostic]:
    return sorted(diags, key=lambda d: (d.line, d.column, d.severity.value, d.code, d.message))


@dataclass
class CheckReport:
    ok: bool
    diagnostics: List[Diagnostic] = field(default_factory=list)
    summary: str = ""

    @classmethod
    def from_diagnostics(cls, diags: List[Diagnostic]) -> "CheckReport":
        diags = sort_diagnostics(diags)
        n_err = sum(1 for d in diags if d.severity is Severity.ERROR)
        n_warn = len(diags) - n_err
        ok = n_err == 0
        if ok:
            head = f"OK {n_err} errors"
        else:
            head = f"FAIL {n_err} errors, {n_warn} warnings"
        lines = [head] + [d.render() for d in diags]
        return cls(ok=ok, diagnostics=diags, summary="\n".join(lines))
