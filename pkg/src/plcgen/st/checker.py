"""Deterministic ST check: tokenize, parse, resolve, aggregate diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

from plcgen.st import scope
from plcgen.st.ast import SyntaxTree
from plcgen.st.diagnostics import Diagnostic, format_diagnostic
from plcgen.st.lexer import tokenize
from plcgen.st.parser import parse


@dataclass
class CheckReport:
    file_id: str
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.severity == "error")

    @property
    def warning_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.severity == "warning")

    @property
    def passed(self) -> bool:
        return self.error_count == 0

    def to_dict(self) -> dict:
        return {
            "file_id": self.file_id,
            "pass": self.passed,
            "error_count": self.error_count,
            "warning_count": self.warning_count,
            "diagnostics": [
                {
                    "code": d.code,
                    "severity": d.severity,
                    "message": d.message,
                    "line": d.line,
                    "column": d.column,
                    "hint": d.hint,
                    "rendered": format_diagnostic(d),
                }
                for d in self.diagnostics
            ],
        }


def check(source: str, file_id: str = "<string>") -> CheckReport:
    """Check ST source text. Deterministic: equal input yields an equal report."""
    tokens, lex_diags = tokenize(source)
    tree, parse_diags = parse(tokens)
    scope_diags = scope.resolve(tree)
    diags = sorted(lex_diags + parse_diags + scope_diags, key=Diagnostic.sort_key)
    return CheckReport(file_id=file_id, diagnostics=diags)


def check_tree(source: str) -> tuple[SyntaxTree, CheckReport]:
    """Like check() but also returns the parsed tree (for tooling)."""
    tokens, lex_diags = tokenize(source)
    tree, parse_diags = parse(tokens)
    scope_diags = scope.resolve(tree)
    diags = sorted(lex_diags + parse_diags + scope_diags, key=Diagnostic.sort_key)
    return tree, CheckReport(file_id="<string>", diagnostics=diags)


def first_error(report: CheckReport) -> Diagnostic | None:
    """The (line, column)-minimal error diagnostic; the one fix prompts embed."""
    for d in report.diagnostics:  # already sorted by (line, column, code)
        if d.severity == "error":
            return d
    return None
