"""Recursive-descent parser with panic-mode recovery.

Recovery skips to the next ';', END_* keyword, or block boundary, so a file with k
independently broken statements yields at least k diagnostics instead of one parse
abort. The parser never raises on malformed input; it returns a partial tree plus
diagnostics.
"""

from __future__ import annotations

from plcgen.st import ast
from plcgen.st import diagnostics as dcodes
from plcgen.st.diagnostics import Diagnostic
from plcgen.st.tokens import (
    KIND_COMMENT,
    KIND_EOF,
    KIND_IDENTIFIER,
    KIND_INTEGER,
    KIND_KEYWORD,
    KIND_OPERATOR,
    KIND_PUNCTUATION,
    KIND_REAL,
    KIND_STRING,
    KIND_TYPED,
    RESERVED_UNSUPPORTED,
    Span,
    Token,
)

POU_KEYWORDS = {"PROGRAM", "FUNCTION", "FUNCTION_BLOCK"}
POU_CLOSER = {
    "PROGRAM": "END_PROGRAM",
    "FUNCTION": "END_FUNCTION",
    "FUNCTION_BLOCK": "END_FUNCTION_BLOCK",
}
VAR_KEYWORDS = {
    "VAR",
    "VAR_INPUT",
    "VAR_OUTPUT",
    "VAR_IN_OUT",
    "VAR_GLOBAL",
    "VAR_TEMP",
    "VAR_EXTERNAL",
}
BLOCK_CLOSERS = {
    "END_IF",
    "END_CASE",
    "END_FOR",
    "END_WHILE",
    "END_REPEAT",
    "END_VAR",
    "END_STRUCT",
    "END_TYPE",
    "END_PROGRAM",
    "END_FUNCTION",
    "END_FUNCTION_BLOCK",
}
# Keywords at which a statement list stops: block closers, branch keywords, and
# declaration openers (a VAR block can never start inside a body).
STMT_STOP = BLOCK_CLOSERS | {"ELSIF", "ELSE", "UNTIL", "TYPE"} | VAR_KEYWORDS | POU_KEYWORDS
CMP_OPS = {"=", "<>", "<", ">", "<=", ">="}
ADD_OPS = {"+", "-"}
ELEMENTARY_STRINGS = {"STRING", "WSTRING"}
STMT_STARTERS = {"IF", "CASE", "FOR", "WHILE", "REPEAT", "EXIT", "RETURN"}
# A declaration list can never continue past one of these.
DECL_BOUNDARY = BLOCK_CLOSERS | POU_KEYWORDS | VAR_KEYWORDS | STMT_STARTERS


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = [t for t in tokens if t.kind != KIND_COMMENT]
        self.pos = 0
        self.diags: list[Diagnostic] = []
        if self.toks:
            last = self.toks[-1]
            line = last.span.line + last.lexeme.count("\n")
            self.eof = Token(
                KIND_EOF, "", Span(line, 1, last.span.offset + last.span.length, 0)
            )
        else:
            self.eof = Token(KIND_EOF, "", Span(1, 1, 0, 0))

    # -- cursor helpers --------------------------------------------------------

    def cur(self) -> Token:
        return self.toks[self.pos] if self.pos < len(self.toks) else self.eof

    def la(self, k: int) -> Token:
        j = self.pos + k
        return self.toks[j] if j < len(self.toks) else self.eof

    def advance(self) -> Token:
        tok = self.cur()
        if self.pos < len(self.toks):
            self.pos += 1
        return tok

    def prev(self) -> Token:
        return self.toks[self.pos - 1] if self.pos > 0 else self.eof

    def at(self, lexeme: str) -> bool:
        tok = self.cur()
        return tok.kind in (KIND_OPERATOR, KIND_PUNCTUATION) and tok.lexeme == lexeme

    def at_kw(self, *words: str) -> bool:
        tok = self.cur()
        return tok.kind == KIND_KEYWORD and tok.upper in words

    def accept(self, lexeme: str) -> Token | None:
        if self.at(lexeme):
            return self.advance()
        return None

    def accept_kw(self, *words: str) -> Token | None:
        if self.at_kw(*words):
            return self.advance()
        return None

    # -- diagnostics and recovery ------------------------------------------------

    def describe(self, tok: Token) -> str:
        if tok.kind == KIND_EOF:
            return "end of file"
        return f"'{tok.lexeme}'"

    def report(self, code: str, message: str, tok: Token, hint: str | None = None) -> None:
        self.diags.append(
            Diagnostic(code, "error", message, tok.span.line, tok.span.column, hint)
        )

    def warn(self, code: str, message: str, tok: Token) -> None:
        self.diags.append(
            Diagnostic(code, "warning", message, tok.span.line, tok.span.column)
        )

    def expect(self, lexeme: str, what: str) -> Token | None:
        if self.at(lexeme):
            return self.advance()
        self.report(
            dcodes.EXPECTED_TOKEN,
            f"expected '{lexeme}' {what}, found {self.describe(self.cur())}",
            self.cur(),
        )
        return None

    def expect_kw(self, word: str, what: str) -> Token | None:
        if self.at_kw(word):
            return self.advance()
        self.report(
            dcodes.EXPECTED_TOKEN,
            f"expected '{word}' {what}, found {self.describe(self.cur())}",
            self.cur(),
        )
        return None

    def expect_ident(self, what: str) -> Token | None:
        if self.cur().kind == KIND_IDENTIFIER:
            return self.advance()
        self.report(
            dcodes.EXPECTED_TOKEN,
            f"expected {what}, found {self.describe(self.cur())}",
            self.cur(),
        )
        return None

    def expect_semi(self) -> None:
        if self.at(";"):
            self.advance()
            return
        self.report(
            dcodes.MISSING_TERMINATOR,
            f"missing ';' before {self.describe(self.cur())}",
            self.cur(),
            hint="terminate the previous statement with ';'",
        )

    def expect_closer(self, word: str, construct: str, opener: Token) -> None:
        if self.at_kw(word):
            self.advance()
            return
        self.report(
            dcodes.MISSING_BLOCK_END,
            f"missing '{word}' to close {construct} started at line {opener.span.line}",
            self.cur(),
        )

    def sync_stmt(self) -> None:
        # panic-mode: skip to the next ';' or block boundary keyword
        while True:
            tok = self.cur()
            if tok.kind == KIND_EOF:
                return
            if tok.kind == KIND_PUNCTUATION and tok.lexeme == ";":
                self.advance()
                return
            if tok.kind == KIND_KEYWORD and (
                tok.upper in STMT_STOP
                or tok.upper in ("IF", "CASE", "FOR", "WHILE", "REPEAT", "EXIT", "RETURN")
            ):
                return
            self.advance()

    def sync_top(self) -> None:
        while True:
            tok = self.cur()
            if tok.kind == KIND_EOF:
                return
            if tok.kind == KIND_KEYWORD and (
                tok.upper in POU_KEYWORDS or tok.upper in ("TYPE", "VAR_GLOBAL")
            ):
                return
            self.advance()

    # -- extents -----------------------------------------------------------------

    def extent_from(self, start: Token) -> Span:
        end = self.prev()
        if end.span.offset < start.span.offset:
            return Span(start.span.line, start.span.column, start.span.offset, 0)
        return Span(
            start.span.line,
            start.span.column,
            start.span.offset,
            end.span.offset + end.span.length - start.span.offset,
        )

    def here(self) -> Span:
        tok = self.cur()
        return Span(tok.span.line, tok.span.column, tok.span.offset, 0)

    # -- top level -----------------------------------------------------------------

    def parse_file(self) -> ast.SyntaxTree:
        tree = ast.SyntaxTree()
        first = self.cur()
        while self.cur().kind != KIND_EOF:
            if self.at(";"):
                self.advance()
                continue
            tok = self.cur()
            if self.at_kw("TYPE"):
                tree.types.extend(self.parse_type_block())
            elif self.at_kw("VAR_GLOBAL", "VAR_EXTERNAL"):
                tree.globals.append(self.parse_var_block())
            elif self.at_kw(*POU_KEYWORDS):
                tree.pous.append(self.parse_pou())
            elif tok.kind == KIND_KEYWORD and tok.upper in RESERVED_UNSUPPORTED:
                self.unsupported_top(tok)
            else:
                self.report(
                    dcodes.EXPECTED_DECLARATION,
                    f"expected a program, function, or function block declaration, "
                    f"found {self.describe(tok)}",
                    tok,
                )
                self.advance()
                self.sync_top()
        if self.toks:
            last = self.toks[-1]
            tree.extent = Span(
                first.span.line,
                first.span.column,
                first.span.offset,
                last.span.offset + last.span.length - first.span.offset,
            )
        return tree

    def unsupported_top(self, tok: Token) -> None:
        closer = "END_" + tok.upper
        if closer in RESERVED_UNSUPPORTED:
            j = self.pos
            while j < len(self.toks):
                t = self.toks[j]
                if t.kind == KIND_KEYWORD and t.upper == closer:
                    self.warn(
                        dcodes.UNSUPPORTED_CONSTRUCT_SKIPPED,
                        f"unsupported construct '{tok.upper}' skipped",
                        tok,
                    )
                    self.pos = j + 1
                    return
                j += 1
        else:
            j = self.pos
            while j < len(self.toks):
                t = self.toks[j]
                if t.kind == KIND_PUNCTUATION and t.lexeme == ";":
                    self.warn(
                        dcodes.UNSUPPORTED_CONSTRUCT_SKIPPED,
                        f"unsupported construct '{tok.upper}' skipped",
                        tok,
                    )
                    self.pos = j + 1
                    return
                j += 1
        self.report(
            dcodes.UNSUPPORTED_CONSTRUCT,
            f"unsupported construct '{tok.upper}'",
            tok,
        )
        self.advance()
        self.sync_top()

    # -- declarations -----------------------------------------------------------------

    def parse_pou(self) -> ast.Pou:
        opener = self.advance()
        kind = opener.upper
        name_tok = self.expect_ident(f"{kind.lower().replace('_', ' ')} name")
        name = name_tok.lexeme if name_tok else "?"
        ret: ast.TypeRef | None = None
        if kind == "FUNCTION":
            if self.expect(":", "before the function return type"):
                ret = self.parse_type()
        var_blocks: list[ast.VarBlock] = []
        while self.at_kw(*VAR_KEYWORDS):
            var_blocks.append(self.parse_var_block())
        body: list[ast.Stmt] = []
        while True:
            body.extend(self.parse_statements())
            if self.at_kw(*VAR_KEYWORDS):
                self.report(
                    dcodes.UNEXPECTED_TOKEN,
                    f"declarations must precede the body, found {self.describe(self.cur())}",
                    self.cur(),
                )
                var_blocks.append(self.parse_var_block())
                continue
            break
        self.expect_closer(POU_CLOSER[kind], f"{kind} '{name}'", opener)
        return ast.Pou(kind, name, ret, var_blocks, body, self.extent_from(opener))

    def parse_var_block(self) -> ast.VarBlock:
        opener = self.advance()
        constant = retain = False
        while self.at_kw("CONSTANT", "RETAIN", "NON_RETAIN"):
            word = self.advance().upper
            if word == "CONSTANT":
                constant = True
            elif word == "RETAIN":
                retain = True
        decls: list[ast.VarDecl] = []
        while True:
            if self.at(";"):
                self.advance()
                continue
            if self.at_kw("END_VAR"):
                self.advance()
                break
            tok = self.cur()
            if tok.kind == KIND_EOF or (
                tok.kind == KIND_KEYWORD and tok.upper in DECL_BOUNDARY
            ):
                self.report(
                    dcodes.MISSING_BLOCK_END,
                    f"missing 'END_VAR' to close {opener.upper} block "
                    f"started at line {opener.span.line}",
                    tok,
                )
                break
            before = self.pos
            decl = self.parse_decl()
            if decl is not None:
                decls.append(decl)
            elif self.pos == before:
                self.advance()
        return ast.VarBlock(opener.upper, constant, retain, decls, self.extent_from(opener))

    def parse_decl(self) -> ast.VarDecl | None:
        start = self.cur()
        name_tok = self.expect_ident("variable name")
        if name_tok is None:
            self.sync_stmt()
            return None
        names = [name_tok.lexeme]
        while self.accept(","):
            more = self.expect_ident("variable name")
            if more is None:
                break
            names.append(more.lexeme)
        address = None
        if self.accept_kw("AT"):
            addr_tok = self.expect_ident("direct address after 'AT'")
            if addr_tok is not None:
                address = addr_tok.lexeme
        if not self.expect(":", "between variable name and type"):
            self.sync_stmt()
            return ast.VarDecl(names, ast.ErrorType(self.here()), None, address,
                               self.extent_from(start))
        ty = self.parse_type()
        init = None
        if self.accept(":="):
            init = self.parse_init()
        self.expect_semi()
        return ast.VarDecl(names, ty, init, address, self.extent_from(start))

    def parse_type(self) -> ast.TypeRef:
        tok = self.cur()
        if self.at_kw("ARRAY"):
            return self.parse_array_type()
        if self.at_kw("STRUCT"):
            return self.parse_struct_type()
        if self.at("("):
            return self.parse_enum_type()
        if tok.kind == KIND_KEYWORD and tok.upper in ("POINTER", "REFERENCE", "REF_TO"):
            self.warn(
                dcodes.UNSUPPORTED_CONSTRUCT_SKIPPED,
                f"unsupported construct '{tok.upper}' skipped",
                tok,
            )
            self.advance()
            if tok.upper in ("POINTER", "REFERENCE"):
                self.expect_kw("TO", f"after '{tok.upper}'")
            return self.parse_type()
        if tok.kind == KIND_IDENTIFIER:
            name_tok = self.advance()
            if self.at_kw("OF"):
                # e.g. TUPLE OF (INT, INT): not a type constructor in IEC 61131-3
                self.report(
                    dcodes.UNKNOWN_TYPE_CONSTRUCTOR,
                    f"unknown type constructor '{name_tok.lexeme} OF'",
                    name_tok,
                    hint="declare fixed-size collections as ARRAY[lo..hi] OF T",
                )
                self.advance()
                if self.at("("):
                    self.skip_balanced_parens()
                else:
                    self.parse_type()
                return ast.ErrorType(self.extent_from(name_tok))
            upper = name_tok.upper
            if upper in ELEMENTARY_STRINGS and (self.at("[") or self.at("(")):
                open_tok = self.advance()
                length = self.parse_expression()
                self.expect("]" if open_tok.lexeme == "[" else ")", "after string length")
                return ast.StringType(upper, length, self.extent_from(name_tok))
            if upper in ELEMENTARY_STRINGS:
                return ast.StringType(upper, None, self.extent_from(name_tok))
            return ast.NamedType(name_tok.lexeme, name_tok.span)
        self.report(
            dcodes.EXPECTED_TOKEN,
            f"expected a type, found {self.describe(tok)}",
            tok,
        )
        return ast.ErrorType(self.here())

    def skip_balanced_parens(self) -> None:
        depth = 0
        while self.cur().kind != KIND_EOF:
            if self.at("("):
                depth += 1
            elif self.at(")"):
                depth -= 1
                self.advance()
                if depth == 0:
                    return
                continue
            elif self.at(";") and depth == 0:
                return
            self.advance()

    def parse_array_type(self) -> ast.TypeRef:
        start = self.advance()
        self.expect("[", "after 'ARRAY'")
        dims: list[tuple[ast.Expr, ast.Expr]] = []
        while True:
            lo = self.parse_expression()
            self.expect("..", "in array bounds")
            hi = self.parse_expression()
            dims.append((lo, hi))
            if not self.accept(","):
                break
        self.expect("]", "after array bounds")
        self.expect_kw("OF", "in array type")
        elem = self.parse_type()
        return ast.ArrayType(dims, elem, self.extent_from(start))

    def parse_struct_type(self) -> ast.TypeRef:
        start = self.advance()
        fields: list[ast.VarDecl] = []
        while True:
            if self.at(";"):
                self.advance()
                continue
            if self.at_kw("END_STRUCT"):
                self.advance()
                break
            tok = self.cur()
            if tok.kind == KIND_EOF or (
                tok.kind == KIND_KEYWORD and tok.upper in DECL_BOUNDARY
            ):
                self.report(
                    dcodes.MISSING_BLOCK_END,
                    f"missing 'END_STRUCT' to close STRUCT started at line {start.span.line}",
                    tok,
                )
                break
            before = self.pos
            decl = self.parse_decl()
            if decl is not None:
                fields.append(decl)
            elif self.pos == before:
                self.advance()
        return ast.StructType(fields, self.extent_from(start))

    def parse_enum_type(self) -> ast.TypeRef:
        start = self.advance()
        members: list[str] = []
        while True:
            tok = self.expect_ident("enumeration member")
            if tok is None:
                break
            members.append(tok.lexeme)
            if self.accept(":="):
                self.parse_expression()  # explicit member value, not retained
            if not self.accept(","):
                break
        self.expect(")", "after enumeration members")
        return ast.EnumType(members, self.extent_from(start))

    def parse_type_block(self) -> list[ast.TypeDecl]:
        opener = self.advance()
        decls: list[ast.TypeDecl] = []
        while True:
            if self.at(";"):
                self.advance()
                continue
            if self.at_kw("END_TYPE"):
                self.advance()
                break
            tok = self.cur()
            if tok.kind == KIND_EOF or (
                tok.kind == KIND_KEYWORD and tok.upper in DECL_BOUNDARY
            ):
                self.report(
                    dcodes.MISSING_BLOCK_END,
                    f"missing 'END_TYPE' to close TYPE block started at line "
                    f"{opener.span.line}",
                    tok,
                )
                break
            start = self.cur()
            name_tok = self.expect_ident("type name")
            if name_tok is None:
                before = self.pos
                self.sync_stmt()
                if self.pos == before:
                    self.advance()
                continue
            self.expect(":", "between type name and definition")
            ty = self.parse_type()
            if self.accept(":="):
                self.parse_init()
            self.expect_semi()
            decls.append(ast.TypeDecl(name_tok.lexeme, ty, self.extent_from(start)))
        return decls

    # -- statements -----------------------------------------------------------------

    def parse_statements(self, in_case: bool = False) -> list[ast.Stmt]:
        stmts: list[ast.Stmt] = []
        while True:
            if self.at(";"):
                self.advance()
                continue
            tok = self.cur()
            if tok.kind == KIND_EOF:
                return stmts
            if tok.kind == KIND_KEYWORD and tok.upper in STMT_STOP:
                return stmts
            if in_case and self.at_case_label():
                return stmts
            stmt = self.parse_statement()
            if stmt is not None:
                stmts.append(stmt)

    def parse_statement(self) -> ast.Stmt | None:
        tok = self.cur()
        if tok.kind == KIND_KEYWORD:
            word = tok.upper
            if word == "IF":
                return self.parse_if()
            if word == "CASE":
                return self.parse_case()
            if word == "FOR":
                return self.parse_for()
            if word == "WHILE":
                return self.parse_while()
            if word == "REPEAT":
                return self.parse_repeat()
            if word == "EXIT":
                self.advance()
                self.expect_semi()
                return ast.Exit(tok.span)
            if word == "RETURN":
                self.advance()
                self.expect_semi()
                return ast.Return(tok.span)
            if word in RESERVED_UNSUPPORTED:
                self.report(
                    dcodes.UNSUPPORTED_CONSTRUCT,
                    f"unsupported construct '{word}'",
                    tok,
                )
                self.advance()
                self.sync_stmt()
                return None
            self.report(
                dcodes.UNEXPECTED_TOKEN,
                f"unexpected {self.describe(tok)}",
                tok,
            )
            self.advance()
            self.sync_stmt()
            return None
        if tok.kind == KIND_IDENTIFIER:
            return self.parse_assign_or_call()
        self.report(
            dcodes.UNEXPECTED_TOKEN,
            f"unexpected {self.describe(tok)} at start of statement",
            tok,
        )
        self.advance()
        self.sync_stmt()
        return None

    def parse_assign_or_call(self) -> ast.Stmt | None:
        start = self.cur()
        target = self.parse_postfix()
        if isinstance(target, ast.Call):
            self.expect_semi()
            return ast.CallStmt(target, self.extent_from(start))
        if self.accept(":="):
            value = self.parse_expression()
            self.expect_semi()
            return ast.Assign(target, value, self.extent_from(start))
        self.report(
            dcodes.EXPECTED_TOKEN,
            f"expected ':=' or '(' after variable, found {self.describe(self.cur())}",
            self.cur(),
        )
        self.sync_stmt()
        return None

    def parse_if(self) -> ast.Stmt:
        opener = self.advance()
        branches: list[ast.IfBranch] = []
        cond = self.parse_expression()
        self.expect_kw("THEN", "after IF condition")
        body = self.parse_statements()
        branches.append(ast.IfBranch(cond, body, self.extent_from(opener)))
        while self.at_kw("ELSIF"):
            arm = self.advance()
            cond = self.parse_expression()
            self.expect_kw("THEN", "after ELSIF condition")
            body = self.parse_statements()
            branches.append(ast.IfBranch(cond, body, self.extent_from(arm)))
        else_body = None
        if self.accept_kw("ELSE"):
            else_body = self.parse_statements()
        self.expect_closer("END_IF", "IF", opener)
        return ast.If(branches, else_body, self.extent_from(opener))

    def at_case_label(self) -> bool:
        j = 0
        seen = False
        while True:
            tok = self.la(j)
            if tok.kind in (KIND_INTEGER, KIND_TYPED) or (
                tok.kind == KIND_IDENTIFIER and not tok.lexeme.startswith(('"', "%"))
            ):
                seen = True
            elif tok.kind == KIND_KEYWORD and tok.upper in ("TRUE", "FALSE"):
                seen = True
            elif tok.kind == KIND_OPERATOR and tok.lexeme in ("-", "+"):
                pass
            elif tok.kind == KIND_PUNCTUATION and tok.lexeme in ("..", ","):
                pass
            elif tok.kind == KIND_PUNCTUATION and tok.lexeme == ":":
                return seen
            else:
                return False
            j += 1

    def parse_case(self) -> ast.Stmt:
        opener = self.advance()
        selector = self.parse_expression()
        self.expect_kw("OF", "after CASE selector")
        entries: list[ast.CaseEntry] = []
        else_body = None
        while True:
            if self.at(";"):
                self.advance()
                continue
            tok = self.cur()
            if tok.kind == KIND_EOF or self.at_kw("END_CASE"):
                break
            if tok.kind == KIND_KEYWORD and tok.upper in (STMT_STOP - {"ELSE"}):
                break
            if self.accept_kw("ELSE"):
                else_body = self.parse_statements()
                break
            if self.at_case_label():
                entry_start = self.cur()
                labels = self.parse_case_labels()
                body = self.parse_statements(in_case=True)
                entries.append(ast.CaseEntry(labels, body, self.extent_from(entry_start)))
            else:
                self.report(
                    dcodes.EXPECTED_TOKEN,
                    f"expected a case label, found {self.describe(tok)}",
                    tok,
                )
                self.advance()
                self.sync_stmt()
        self.expect_closer("END_CASE", "CASE", opener)
        return ast.Case(selector, entries, else_body, self.extent_from(opener))

    def parse_case_labels(self) -> list[ast.CaseLabel]:
        labels: list[ast.CaseLabel] = []
        while True:
            start = self.cur()
            low = self.parse_expression()
            high = None
            if self.accept(".."):
                high = self.parse_expression()
            labels.append(ast.CaseLabel(low, high, self.extent_from(start)))
            if not self.accept(","):
                break
        self.expect(":", "after case label")
        return labels

    def parse_for(self) -> ast.Stmt:
        opener = self.advance()
        var_tok = self.expect_ident("loop variable after 'FOR'")
        var = (
            ast.Name(var_tok.lexeme, var_tok.span)
            if var_tok
            else ast.Name("?", self.here())
        )
        self.expect(":=", "after the loop variable")
        start = self.parse_expression()
        self.expect_kw("TO", "in FOR header")
        stop = self.parse_expression()
        step = None
        if self.accept_kw("BY"):
            step = self.parse_expression()
        self.expect_kw("DO", "after FOR header")
        body = self.parse_statements()
        self.expect_closer("END_FOR", "FOR", opener)
        return ast.For(var, start, stop, step, body, self.extent_from(opener))

    def parse_while(self) -> ast.Stmt:
        opener = self.advance()
        cond = self.parse_expression()
        self.expect_kw("DO", "after WHILE condition")
        body = self.parse_statements()
        self.expect_closer("END_WHILE", "WHILE", opener)
        return ast.While(cond, body, self.extent_from(opener))

    def parse_repeat(self) -> ast.Stmt:
        opener = self.advance()
        body = self.parse_statements()
        self.expect_kw("UNTIL", "to end REPEAT body")
        cond = self.parse_expression()
        self.expect_closer("END_REPEAT", "REPEAT", opener)
        return ast.RepeatUntil(body, cond, self.extent_from(opener))

    # -- expressions ---------------------------------------------------------------

    def parse_expression(self) -> ast.Expr:
        return self.parse_or()

    def binary_loop(self, parse_side, match) -> ast.Expr:
        left = parse_side()
        while True:
            op = match()
            if op is None:
                return left
            tok = self.advance()
            right = parse_side()
            span = ast.Span(
                left.extent.line,
                left.extent.column,
                left.extent.offset,
                right.extent.offset + right.extent.length - left.extent.offset,
            ) if right.extent.offset >= left.extent.offset else left.extent
            left = ast.Binary(op, left, right, span)

    def parse_or(self) -> ast.Expr:
        return self.binary_loop(
            self.parse_xor, lambda: "OR" if self.at_kw("OR") else None
        )

    def parse_xor(self) -> ast.Expr:
        return self.binary_loop(
            self.parse_and, lambda: "XOR" if self.at_kw("XOR") else None
        )

    def parse_and(self) -> ast.Expr:
        def match():
            # '&' is the IEC-sanctioned spelling of AND; normalize in the tree
            if self.at_kw("AND") or self.at("&"):
                return "AND"
            return None

        return self.binary_loop(self.parse_comparison, match)

    def parse_comparison(self) -> ast.Expr:
        def match():
            tok = self.cur()
            if tok.kind == KIND_OPERATOR and tok.lexeme in CMP_OPS:
                return tok.lexeme
            return None

        return self.binary_loop(self.parse_add, match)

    def parse_add(self) -> ast.Expr:
        def match():
            tok = self.cur()
            if tok.kind == KIND_OPERATOR and tok.lexeme in ADD_OPS:
                return tok.lexeme
            return None

        return self.binary_loop(self.parse_mul, match)

    def parse_mul(self) -> ast.Expr:
        def match():
            tok = self.cur()
            if tok.kind == KIND_OPERATOR and tok.lexeme in ("*", "/"):
                return tok.lexeme
            if self.at_kw("MOD"):
                return "MOD"
            return None

        return self.binary_loop(self.parse_power, match)

    def parse_power(self) -> ast.Expr:
        return self.binary_loop(
            self.parse_unary, lambda: "**" if self.at("**") else None
        )

    def parse_unary(self) -> ast.Expr:
        tok = self.cur()
        if self.at_kw("NOT"):
            self.advance()
            operand = self.parse_unary()
            return ast.Unary("NOT", operand, self.extent_from(tok))
        if tok.kind == KIND_OPERATOR and tok.lexeme in ("-", "+"):
            self.advance()
            operand = self.parse_unary()
            return ast.Unary(tok.lexeme, operand, self.extent_from(tok))
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        start = self.cur()
        expr = self.parse_primary()
        while True:
            if self.at("."):
                self.advance()
                field_tok = self.expect_ident("member name after '.'")
                if field_tok is None:
                    return expr
                expr = ast.Member(expr, field_tok.lexeme, self.extent_from(start))
            elif self.at("["):
                self.advance()
                subs = [self.parse_expression()]
                while self.accept(","):
                    subs.append(self.parse_expression())
                self.expect("]", "after array subscript")
                expr = ast.Index(expr, subs, self.extent_from(start))
            elif self.at("(") and isinstance(expr, (ast.Name, ast.Member)):
                self.advance()
                args = self.parse_call_args()
                expr = ast.Call(expr, args, self.extent_from(start))
            else:
                return expr

    def parse_call_args(self) -> list[ast.Arg]:
        args: list[ast.Arg] = []
        if self.accept(")"):
            return args
        while True:
            args.append(self.parse_arg())
            if self.accept(","):
                continue
            break
        self.expect(")", "after call arguments")
        return args

    def parse_arg(self) -> ast.Arg:
        start = self.cur()
        if start.kind == KIND_IDENTIFIER and not start.lexeme.startswith(('"', "%")):
            follow = self.la(1)
            if follow.kind == KIND_OPERATOR and follow.lexeme == ":=":
                self.advance()
                self.advance()
                value = self.parse_expression()
                return ast.Arg(start.lexeme, "in", value, self.extent_from(start))
            if follow.kind == KIND_OPERATOR and follow.lexeme == "=>":
                self.advance()
                self.advance()
                value = self.parse_postfix()
                return ast.Arg(start.lexeme, "out", value, self.extent_from(start))
        value = self.parse_expression()
        if isinstance(value, ast.ErrorExpr):
            # guarantee progress inside argument lists
            if not (self.at(")") or self.at(",") or self.cur().kind == KIND_EOF):
                self.advance()
        return ast.Arg(None, "in", value, self.extent_from(start))

    def parse_primary(self) -> ast.Expr:
        tok = self.cur()
        if tok.kind == KIND_INTEGER:
            self.advance()
            return ast.Literal("integer", tok.lexeme, tok.span)
        if tok.kind == KIND_REAL:
            self.advance()
            return ast.Literal("real", tok.lexeme, tok.span)
        if tok.kind == KIND_TYPED:
            self.advance()
            return ast.Literal("typed", tok.lexeme, tok.span)
        if tok.kind == KIND_STRING:
            self.advance()
            return ast.Literal("string", tok.lexeme, tok.span)
        if tok.kind == KIND_KEYWORD and tok.upper in ("TRUE", "FALSE"):
            self.advance()
            return ast.Literal("bool", tok.upper, tok.span)
        if tok.kind == KIND_IDENTIFIER:
            self.advance()
            return ast.Name(tok.lexeme, tok.span)
        if self.at("("):
            self.advance()
            expr = self.parse_expression()
            self.expect(")", "to close the parenthesized expression")
            return expr
        self.report(
            dcodes.EXPECTED_EXPRESSION,
            f"expected an expression, found {self.describe(tok)}",
            tok,
        )
        return ast.ErrorExpr(self.here())

    def parse_init(self) -> ast.Expr:
        if self.at("["):
            opener = self.advance()
            items: list[ast.Expr] = []
            if not self.at("]"):
                while True:
                    item = self.parse_expression()
                    if self.at("(") and isinstance(item, ast.Literal):
                        self.advance()
                        value = self.parse_expression()
                        self.expect(")", "after repeated initializer")
                        item = ast.RepeatInit(item, value, self.extent_from(opener))
                    items.append(item)
                    if isinstance(item, ast.ErrorExpr) and not (
                        self.at(",") or self.at("]") or self.cur().kind == KIND_EOF
                    ):
                        self.advance()
                    if self.accept(","):
                        continue
                    break
            self.expect("]", "to close the array initializer")
            return ast.ArrayInit(items, self.extent_from(opener))
        return self.parse_expression()


def parse(tokens: list[Token]) -> tuple[ast.SyntaxTree, list[Diagnostic]]:
    """Parse a token stream into a tree. Returns (tree, diagnostics); never raises."""
    parser = _Parser(tokens)
    tree = parser.parse_file()
    return tree, parser.diags
