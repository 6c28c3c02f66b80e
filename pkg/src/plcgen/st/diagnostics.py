"""Diagnostic records emitted by the ST checker.

Codes are stable API: error messages may be reworded, codes may not be renumbered.
Fix prompts embed the rendered single-line form verbatim, so `format_diagnostic`
must stay deterministic and single-line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Lexical errors
UNEXPECTED_CHARACTER = "E001"
UNTERMINATED_STRING = "E002"
UNTERMINATED_COMMENT = "E003"
MALFORMED_NUMBER = "E004"
MALFORMED_TYPED_LITERAL = "E005"
UNTERMINATED_QUOTED_IDENTIFIER = "E006"

# Parse errors
EXPECTED_TOKEN = "E101"
MISSING_TERMINATOR = "E102"
UNEXPECTED_TOKEN = "E103"
UNKNOWN_TYPE_CONSTRUCTOR = "E104"
EXPECTED_EXPRESSION = "E105"
MISSING_BLOCK_END = "E106"
EXPECTED_DECLARATION = "E107"
UNSUPPORTED_CONSTRUCT = "E110"

# Scope / semantic errors
UNDECLARED_IDENTIFIER = "E201"
UNKNOWN_TYPE = "E202"
DUPLICATE_DECLARATION = "E203"
WRONG_ARITY = "E204"
UNKNOWN_PARAMETER = "E205"
NOT_CALLABLE = "E206"

# Warnings
UNSUPPORTED_CONSTRUCT_SKIPPED = "W001"

SEVERITIES = ("error", "warning")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    message: str
    line: int  # 1-based
    column: int  # 1-based
    hint: str | None = field(default=None)

    def sort_key(self) -> tuple:
        return (self.line, self.column, self.code, self.message)


def format_diagnostic(diag: Diagnostic) -> str:
    """Render the canonical single-line form: ``<code>: <message> at line L, column C``."""
    return f"{diag.code}: {diag.message} at line {diag.line}, column {diag.column}"
