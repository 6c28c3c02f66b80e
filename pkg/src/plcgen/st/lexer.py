"""Hand-rolled scanner for the ST subset.

Spans carry true UTF-8 byte offsets so downstream byte-exact slicing (dataset cut
points) works on any input. Unknown characters produce a diagnostic and are skipped;
the scanner never raises.
"""

from __future__ import annotations

from plcgen.st import diagnostics as dcodes
from plcgen.st.diagnostics import Diagnostic
from plcgen.st.tokens import (
    ALL_WORDS,
    KIND_COMMENT,
    KIND_IDENTIFIER,
    KIND_INTEGER,
    KIND_KEYWORD,
    KIND_OPERATOR,
    KIND_PUNCTUATION,
    KIND_REAL,
    KIND_STRING,
    KIND_TYPED,
    MULTI_CHAR_OPERATORS,
    PUNCTUATION,
    SINGLE_CHAR_OPERATORS,
    Span,
    Token,
)

_HEX_DIGITS = set("0123456789abcdefABCDEF_")
_BASE_DIGITS = {
    2: set("01_"),
    8: set("01234567_"),
    16: _HEX_DIGITS,
}
# Characters that may continue the value part of a typed literal such as
# T#1h20m, TOD#06:30:00, WORD#16#00FF, DT#2024-01-01-00:00:00.
_TYPED_BODY = set("0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_.:#")


def _is_word_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.n = len(source)
        self.i = 0
        self.byte = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.diags: list[Diagnostic] = []

    # -- low-level cursor ----------------------------------------------------

    def peek(self, ahead: int = 0) -> str:
        j = self.i + ahead
        return self.source[j] if j < self.n else ""

    def advance(self) -> str:
        ch = self.source[self.i]
        self.i += 1
        self.byte += len(ch.encode("utf-8"))
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def mark(self) -> tuple[int, int, int, int]:
        return (self.line, self.col, self.byte, self.i)

    def emit(self, kind: str, mark: tuple[int, int, int, int]) -> Token:
        line, col, byte0, i0 = mark
        tok = Token(kind, self.source[i0 : self.i], Span(line, col, byte0, self.byte - byte0))
        self.tokens.append(tok)
        return tok

    def error(self, code: str, message: str, mark: tuple[int, int, int, int]) -> None:
        line, col = mark[0], mark[1]
        self.diags.append(Diagnostic(code, "error", message, line, col))

    # -- token scanners --------------------------------------------------------

    def run(self) -> tuple[list[Token], list[Diagnostic]]:
        while self.i < self.n:
            ch = self.peek()
            if ch.isspace():
                self.advance()
            elif ch == "(" and self.peek(1) == "*":
                self.block_comment()
            elif ch == "/" and self.peek(1) == "/":
                self.line_comment()
            elif ch == "/" and self.peek(1) == "*":
                self.c_comment()
            elif ch == "'":
                self.string_literal()
            elif ch == '"':
                self.quoted_identifier()
            elif ch == "%":
                self.direct_address()
            elif _is_word_start(ch):
                self.word()
            elif ch.isdigit():
                self.number()
            else:
                self.operator_or_punct()
        return self.tokens, self.diags

    def block_comment(self) -> None:
        m = self.mark()
        self.advance()
        self.advance()
        depth = 1
        while self.i < self.n:
            if self.peek() == "(" and self.peek(1) == "*":
                self.advance()
                self.advance()
                depth += 1
            elif self.peek() == "*" and self.peek(1) == ")":
                self.advance()
                self.advance()
                depth -= 1
                if depth == 0:
                    self.emit(KIND_COMMENT, m)
                    return
            else:
                self.advance()
        self.error(dcodes.UNTERMINATED_COMMENT, "unterminated comment", m)
        self.emit(KIND_COMMENT, m)

    def line_comment(self) -> None:
        m = self.mark()
        while self.i < self.n and self.peek() != "\n":
            self.advance()
        self.emit(KIND_COMMENT, m)

    def c_comment(self) -> None:
        m = self.mark()
        self.advance()
        self.advance()
        while self.i < self.n:
            if self.peek() == "*" and self.peek(1) == "/":
                self.advance()
                self.advance()
                self.emit(KIND_COMMENT, m)
                return
            self.advance()
        self.error(dcodes.UNTERMINATED_COMMENT, "unterminated comment", m)
        self.emit(KIND_COMMENT, m)

    def string_literal(self) -> None:
        m = self.mark()
        self.advance()
        while self.i < self.n:
            ch = self.peek()
            if ch == "\n":
                break
            if ch == "$":
                self.advance()
                if self.i < self.n and self.peek() != "\n":
                    self.advance()
                continue
            self.advance()
            if ch == "'":
                self.emit(KIND_STRING, m)
                return
        self.error(dcodes.UNTERMINATED_STRING, "unterminated string literal", m)
        self.emit(KIND_STRING, m)

    def quoted_identifier(self) -> None:
        m = self.mark()
        self.advance()
        while self.i < self.n:
            ch = self.peek()
            if ch == "\n":
                break
            self.advance()
            if ch == '"':
                self.emit(KIND_IDENTIFIER, m)
                return
        self.error(
            dcodes.UNTERMINATED_QUOTED_IDENTIFIER, "unterminated quoted identifier", m
        )
        self.emit(KIND_IDENTIFIER, m)

    def direct_address(self) -> None:
        # Directly represented variables: %QX0.0, %IW4, %MD12
        m = self.mark()
        self.advance()
        body = 0
        while self.i < self.n and (self.peek().isalnum() or self.peek() in "._"):
            self.advance()
            body += 1
        if body == 0:
            self.error(dcodes.UNEXPECTED_CHARACTER, "unexpected character '%'", m)
        else:
            self.emit(KIND_IDENTIFIER, m)

    def word(self) -> None:
        m = self.mark()
        while self.i < self.n and _is_word_char(self.peek()):
            self.advance()
        if self.peek() == "#":
            self.typed_literal(m)
            return
        text = self.source[m[3] : self.i]
        kind = KIND_KEYWORD if text.upper() in ALL_WORDS else KIND_IDENTIFIER
        self.emit(kind, m)

    def typed_literal(self, m: tuple[int, int, int, int]) -> None:
        self.advance()  # '#'
        body = 0
        while self.i < self.n:
            ch = self.peek()
            if ch in _TYPED_BODY:
                self.advance()
                body += 1
            elif ch == "-" and (
                self.source[self.i - 1] in "#:"
                or (self.source[self.i - 1].isdigit() and self.peek(1).isdigit())
            ):
                # minus continues date/negative-duration bodies but never eats a
                # binary subtraction such as T#5s-t
                self.advance()
                body += 1
            else:
                break
        if body == 0:
            self.error(dcodes.MALFORMED_TYPED_LITERAL, "malformed typed literal", m)
        self.emit(KIND_TYPED, m)

    def number(self) -> None:
        m = self.mark()
        while self.i < self.n and (self.peek().isdigit() or self.peek() == "_"):
            self.advance()
        if self.peek() == "#":
            self.based_literal(m)
            return
        is_real = False
        if self.peek() == "." and self.peek(1).isdigit():
            is_real = True
            self.advance()
            while self.i < self.n and (self.peek().isdigit() or self.peek() == "_"):
                self.advance()
        if self.peek() in ("e", "E") and (
            self.peek(1).isdigit() or (self.peek(1) in "+-" and self.peek(2).isdigit())
        ):
            is_real = True
            self.advance()
            if self.peek() in "+-":
                self.advance()
            while self.i < self.n and self.peek().isdigit():
                self.advance()
        self.emit(KIND_REAL if is_real else KIND_INTEGER, m)

    def based_literal(self, m: tuple[int, int, int, int]) -> None:
        base_text = self.source[m[3] : self.i].replace("_", "")
        self.advance()  # '#'
        body_start = self.i
        while self.i < self.n and (self.peek().isalnum() or self.peek() == "_"):
            self.advance()
        body = self.source[body_start : self.i]
        tok = self.emit(KIND_INTEGER, m)
        try:
            base = int(base_text)
        except ValueError:
            base = -1
        digits = _BASE_DIGITS.get(base)
        if digits is None or not body or any(c not in digits for c in body):
            self.diags.append(
                Diagnostic(
                    dcodes.MALFORMED_NUMBER,
                    "error",
                    f"malformed based literal '{tok.lexeme}'",
                    m[0],
                    m[1],
                )
            )

    def operator_or_punct(self) -> None:
        m = self.mark()
        two = self.source[self.i : self.i + 2]
        if two in MULTI_CHAR_OPERATORS:
            self.advance()
            self.advance()
            self.emit(KIND_OPERATOR, m)
            return
        if two == "..":
            self.advance()
            self.advance()
            self.emit(KIND_PUNCTUATION, m)
            return
        ch = self.peek()
        if ch in SINGLE_CHAR_OPERATORS:
            self.advance()
            self.emit(KIND_OPERATOR, m)
        elif ch in PUNCTUATION:
            self.advance()
            self.emit(KIND_PUNCTUATION, m)
        else:
            self.advance()
            self.error(
                dcodes.UNEXPECTED_CHARACTER, f"unexpected character {ch!r}", m
            )


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    """Scan ``source`` into tokens. Returns (tokens, diagnostics); never raises."""
    return _Lexer(source).run()
