"""Source spans, diagnostics, exit codes, and compiler error types."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_INTERNAL_ERROR = 3


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class Stage(Enum):
    PARSE = "parse"
    EXPAND = "expand"
    UNIVERSE = "universe"
    HIERARCHY = "hierarchy"
    CHECK = "check"
    TYPING = "typing"
    EMIT = "emit"
    DRIVER = "driver"


@dataclass
class Diagnostic:
    stage: Stage
    severity: str  # "error" or "warning"
    span: Span | None
    message: str  # may be multi-line; only the first line gets the location prefix

    def render(self) -> str:
        head, _, rest = self.message.partition("\n")
        prefix = f"{self.span}: " if self.span is not None else ""
        out = f"{prefix}{self.severity}: {head}"
        if rest:
            out += "\n" + rest
        return out

    def to_json(self) -> dict:
        span = None
        if self.span is not None:
            span = {"file": self.span.file, "line": self.span.line, "col": self.span.col}
        return {
            "stage": self.stage.value,
            "severity": self.severity,
            "span": span,
            "message": self.message,
        }


class CompileError(Exception):
    """A stage failed; carries the diagnostics it produced."""

    def __init__(self, diagnostics: list[Diagnostic] | Diagnostic):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = diagnostics
        super().__init__(diagnostics[0].message if diagnostics else "compile error")


class InternalError(Exception):
    """An internal invariant was violated (exit code 3)."""


def error(stage: Stage, span: Span | None, message: str) -> Diagnostic:
    return Diagnostic(stage, "error", span, message)


def warning(stage: Stage, span: Span | None, message: str) -> Diagnostic:
    return Diagnostic(stage, "warning", span, message)
