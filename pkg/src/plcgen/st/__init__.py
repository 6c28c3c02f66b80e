"""IEC 61131-3 Structured Text frontend: lexer, parser, scope checker, pretty printer."""

from plcgen.st.diagnostics import Diagnostic, format_diagnostic
from plcgen.st.tokens import Span, Token
from plcgen.st.lexer import tokenize
from plcgen.st.parser import parse
from plcgen.st.checker import CheckReport, check, first_error
from plcgen.st.pretty import to_source

__all__ = [
    "Diagnostic",
    "format_diagnostic",
    "Span",
    "Token",
    "tokenize",
    "parse",
    "CheckReport",
    "check",
    "first_error",
    "to_source",
]
