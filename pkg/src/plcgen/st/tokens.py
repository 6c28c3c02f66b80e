"""Token and span definitions shared by the lexer and parser."""

from __future__ import annotations

from dataclasses import dataclass

KIND_KEYWORD = "keyword"
KIND_IDENTIFIER = "identifier"
KIND_INTEGER = "integer-literal"
KIND_REAL = "real-literal"
KIND_TYPED = "typed-literal"
KIND_STRING = "string-literal"
KIND_OPERATOR = "operator"
KIND_PUNCTUATION = "punctuation"
KIND_COMMENT = "comment"
KIND_EOF = "eof"

KINDS = frozenset(
    {
        KIND_KEYWORD,
        KIND_IDENTIFIER,
        KIND_INTEGER,
        KIND_REAL,
        KIND_TYPED,
        KIND_STRING,
        KIND_OPERATOR,
        KIND_PUNCTUATION,
        KIND_COMMENT,
        KIND_EOF,
    }
)


@dataclass(frozen=True)
class Span:
    line: int  # 1-based line of the first character
    column: int  # 1-based column (in characters) of the first character
    offset: int  # byte offset into the UTF-8 encoding of the source
    length: int  # length in bytes


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    span: Span

    @property
    def upper(self) -> str:
        return self.lexeme.upper()

    def __repr__(self) -> str:  # compact for test failure output
        return f"Token({self.kind}, {self.lexeme!r}, {self.span.line}:{self.span.column})"


# Keywords of the supported ST subset. Lexing is case-insensitive; the canonical
# spelling is uppercase.
KEYWORDS = frozenset(
    {
        "PROGRAM",
        "END_PROGRAM",
        "FUNCTION",
        "END_FUNCTION",
        "FUNCTION_BLOCK",
        "END_FUNCTION_BLOCK",
        "VAR",
        "VAR_INPUT",
        "VAR_OUTPUT",
        "VAR_IN_OUT",
        "VAR_GLOBAL",
        "VAR_TEMP",
        "VAR_EXTERNAL",
        "END_VAR",
        "CONSTANT",
        "RETAIN",
        "NON_RETAIN",
        "AT",
        "TYPE",
        "END_TYPE",
        "ARRAY",
        "OF",
        "STRUCT",
        "END_STRUCT",
        "IF",
        "THEN",
        "ELSIF",
        "ELSE",
        "END_IF",
        "CASE",
        "END_CASE",
        "FOR",
        "TO",
        "BY",
        "DO",
        "END_FOR",
        "WHILE",
        "END_WHILE",
        "REPEAT",
        "UNTIL",
        "END_REPEAT",
        "EXIT",
        "RETURN",
        "AND",
        "OR",
        "XOR",
        "NOT",
        "MOD",
        "TRUE",
        "FALSE",
    }
)

# Reserved words of full IEC 61131-3 / SCL that the subset does not implement.
# The parser recognizes them enough to skip cleanly (warning) or to refuse loudly.
# Short words that double as common variable names (STEP, TASK, ACTION...) are
# deliberately absent: treating them as keywords would reject ordinary programs.
RESERVED_UNSUPPORTED = frozenset(
    {
        "POINTER",
        "REF_TO",
        "REFERENCE",
        "CLASS",
        "END_CLASS",
        "METHOD",
        "END_METHOD",
        "INTERFACE",
        "END_INTERFACE",
        "NAMESPACE",
        "END_NAMESPACE",
        "CONFIGURATION",
        "END_CONFIGURATION",
        "VAR_ACCESS",
        "VAR_CONFIG",
    }
)

ALL_WORDS = KEYWORDS | RESERVED_UNSUPPORTED

# Multi-character operators must be tried before single-character ones.
MULTI_CHAR_OPERATORS = (":=", "=>", "**", "<=", ">=", "<>")
SINGLE_CHAR_OPERATORS = frozenset({"=", "<", ">", "+", "-", "*", "/", "&"})
PUNCTUATION = frozenset({";", ",", "(", ")", "[", "]", ":", "."})
