"""Diagnostics and the catalogue of rule identifiers."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any, Literal

from prolint.lexer import PrologSyntaxError, SourceSpan

__all__ = [
    "RULES",
    "Diagnostic",
    "RuleInfo",
    "Severity",
    "make_diagnostic",
    "sort_diagnostics",
    "syntax_diagnostic",
]

Severity = Literal["warning", "error"]

SYNTAX_ERROR = "syntax.error"


@dataclass(frozen=True, slots=True)
class RuleInfo:
    """A registered rule: its identifier, default severity and a short summary."""

    rule_id: str
    severity: Severity
    summary: str


RULES: dict[str, RuleInfo] = {
    info.rule_id: info
    for info in (
        RuleInfo(SYNTAX_ERROR, "error", "source text cannot be tokenized or parsed"),
        RuleInfo("cov_2_1", "warning", "indent with one kind of whitespace"),
        RuleInfo("cov_2_2", "warning", "indent by a consistent unit"),
        RuleInfo("cov_2_3", "warning", "keep lines short"),
        RuleInfo("cov_2_4", "warning", "keep rules small"),
        RuleInfo("cov_2_5", "warning", "put a space after argument commas"),
        RuleInfo("cov_2_6", "warning", "end each clause with a line break"),
        RuleInfo("cov_2_7", "warning", "break lines after ':-' and after subgoals"),
        RuleInfo("cov_2_14", "warning", "indent the goals between repeat and cut"),
        RuleInfo("style.trailing_whitespace", "warning", "no whitespace at line ends"),
        RuleInfo("cov_3_1", "warning", "name predicates in one style"),
        RuleInfo("cov_3_4", "warning", "name variables in one style"),
        RuleInfo("cov_3_12", "warning", "predicate names follow the naming convention"),
    )
}


@dataclass(frozen=True, kw_only=True, slots=True)
class Diagnostic:
    """One rule violation at a location in a file."""

    rule_id: str
    severity: Severity
    message: str
    file: str
    span: SourceSpan

    @property
    def sort_key(self) -> tuple[str, int, str]:
        """Order by file, then position, then rule."""
        return (self.file, self.span.byte_start, self.rule_id)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON object form of this diagnostic."""
        return {
            "file": self.file,
            "line": self.span.line_start,
            "col": self.span.col_start,
            "end_line": self.span.line_end,
            "end_col": self.span.col_end,
            "rule": self.rule_id,
            "severity": self.severity,
            "message": self.message,
        }

    def format_text(self) -> str:
        """Return the ``file:line:col: severity rule message`` form."""
        location = f"{self.file}:{self.span.line_start}:{self.span.col_start}"
        return f"{location}: {self.severity} {self.rule_id} {self.message}"


def make_diagnostic(rule_id: str, message: str, span: SourceSpan, *, file: str = "") -> Diagnostic:
    """Build a diagnostic for a registered rule, with the rule's severity."""
    try:
        info = RULES[rule_id]
    except KeyError:
        raise ValueError(f"Unknown rule {rule_id!r}") from None
    return Diagnostic(
        rule_id=rule_id, severity=info.severity, message=message, file=file, span=span
    )


def syntax_diagnostic(error: PrologSyntaxError, *, file: str = "") -> Diagnostic:
    """Report a lex or parse error as a diagnostic."""
    return make_diagnostic(SYNTAX_ERROR, error.message, error.span, file=file)


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Return `diagnostics` in deterministic (file, offset, rule) order."""
    return sorted(diagnostics, key=lambda d: d.sort_key)
