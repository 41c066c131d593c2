"""Diagnostics for protocol sources.

Rule ids are stable: D-* rules are structural errors from validation,
L-* rules come from the design lint.  Each lint diagnostic cites exactly
one of the five design principles, so tooling can group findings by the
principle they protect.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


PRINCIPLES = frozenset(
    {
        "accountability-modularity",
        "explicit-social-meaning",
        "solely-social-meaning",
        "social-technical-separation",
        "no-principal-internals",
        "syntax",
    }
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    @staticmethod
    def point(line: int, col: int) -> "Span":
        return Span(line, col, line, col + 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    rule: str
    span: Span
    message: str
    principle: str = "syntax"

    def __post_init__(self) -> None:
        if self.principle not in PRINCIPLES:
            raise ValueError(f"unknown principle {self.principle!r}")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def human(self, filename: str = "<input>") -> str:
        return (
            f"{filename}:{self.span.line}:{self.span.col}: "
            f"{self.severity.value} {self.rule}: {self.message} [{self.principle}]"
        )

    def record(self) -> str:
        return json.dumps(
            {
                "severity": self.severity.value,
                "rule": self.rule,
                "line": self.span.line,
                "col": self.span.col,
                "end_line": self.span.end_line,
                "end_col": self.span.end_col,
                "message": self.message,
                "principle": self.principle,
            },
            sort_keys=False,
        )


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
