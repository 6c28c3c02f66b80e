"""Syntax tree for the ST subset.

Every node carries an ``extent`` span covering its full source range (byte offsets),
so child extents nest inside their parents. Nodes are plain dataclasses; the parser
is the only constructor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from plcgen.st.tokens import Span


# -- expressions ---------------------------------------------------------------


@dataclass
class Literal:
    kind: str  # "integer" | "real" | "typed" | "string" | "bool"
    text: str
    extent: Span


@dataclass
class Name:
    text: str  # lexeme as written; quoted identifiers keep their quotes
    extent: Span

    @property
    def quoted(self) -> bool:
        return self.text.startswith('"')

    @property
    def direct(self) -> bool:
        return self.text.startswith("%")

    @property
    def key(self) -> str:
        return self.text.lower()


@dataclass
class Member:
    base: "Expr"
    field_name: str
    extent: Span


@dataclass
class Index:
    base: "Expr"
    subscripts: list["Expr"]
    extent: Span


@dataclass
class Unary:
    op: str  # "NOT" | "-" | "+"
    operand: "Expr"
    extent: Span


@dataclass
class Binary:
    op: str  # canonical uppercase / symbol form
    left: "Expr"
    right: "Expr"
    extent: Span


@dataclass
class Arg:
    name: str | None  # formal parameter name, if given
    direction: str  # "in" for name:=expr / positional, "out" for name=>target
    value: "Expr"
    extent: Span


@dataclass
class Call:
    target: "Expr"  # Name or Member
    args: list[Arg]
    extent: Span


@dataclass
class ArrayInit:
    items: list["Expr"]
    extent: Span


@dataclass
class RepeatInit:
    count: "Expr"
    value: "Expr"
    extent: Span


@dataclass
class ErrorExpr:
    extent: Span


Expr = (
    Literal
    | Name
    | Member
    | Index
    | Unary
    | Binary
    | Call
    | ArrayInit
    | RepeatInit
    | ErrorExpr
)


# -- statements ------------------------------------------------------------------


@dataclass
class Assign:
    target: Expr
    value: Expr
    extent: Span


@dataclass
class CallStmt:
    call: Call
    extent: Span


@dataclass
class IfBranch:
    condition: Expr
    body: list["Stmt"]
    extent: Span


@dataclass
class If:
    branches: list[IfBranch]  # IF plus any ELSIF arms, in order
    else_body: list["Stmt"] | None
    extent: Span


@dataclass
class CaseLabel:
    low: Expr
    high: Expr | None  # set for range labels lo..hi
    extent: Span


@dataclass
class CaseEntry:
    labels: list[CaseLabel]
    body: list["Stmt"]
    extent: Span


@dataclass
class Case:
    selector: Expr
    entries: list[CaseEntry]
    else_body: list["Stmt"] | None
    extent: Span


@dataclass
class For:
    var: Name
    start: Expr
    stop: Expr
    step: Expr | None
    body: list["Stmt"]
    extent: Span


@dataclass
class While:
    condition: Expr
    body: list["Stmt"]
    extent: Span


@dataclass
class RepeatUntil:
    body: list["Stmt"]
    condition: Expr
    extent: Span


@dataclass
class Exit:
    extent: Span


@dataclass
class Return:
    extent: Span


Stmt = Assign | CallStmt | If | Case | For | While | RepeatUntil | Exit | Return


# -- declarations ------------------------------------------------------------------


@dataclass
class NamedType:
    name: str
    extent: Span

    @property
    def key(self) -> str:
        return self.name.lower()


@dataclass
class StringType:
    name: str  # STRING or WSTRING
    length: Expr | None
    extent: Span


@dataclass
class ArrayType:
    dims: list[tuple[Expr, Expr]]
    element: "TypeRef"
    extent: Span


@dataclass
class StructType:
    fields: list["VarDecl"]
    extent: Span


@dataclass
class EnumType:
    members: list[str]
    extent: Span


@dataclass
class ErrorType:
    extent: Span


TypeRef = NamedType | StringType | ArrayType | StructType | EnumType | ErrorType


@dataclass
class VarDecl:
    names: list[str]
    type: TypeRef
    init: Expr | None
    address: str | None  # AT %QX0.0 location, if any
    extent: Span


@dataclass
class VarBlock:
    kind: str  # VAR | VAR_INPUT | VAR_OUTPUT | VAR_IN_OUT | VAR_GLOBAL | VAR_TEMP | VAR_EXTERNAL
    constant: bool
    retain: bool
    decls: list[VarDecl]
    extent: Span


@dataclass
class TypeDecl:
    name: str
    type: TypeRef
    extent: Span


@dataclass
class Pou:
    kind: str  # PROGRAM | FUNCTION | FUNCTION_BLOCK
    name: str
    return_type: TypeRef | None  # FUNCTION only
    var_blocks: list[VarBlock]
    body: list[Stmt]
    extent: Span


@dataclass
class SyntaxTree:
    pous: list[Pou] = field(default_factory=list)
    types: list[TypeDecl] = field(default_factory=list)
    globals: list[VarBlock] = field(default_factory=list)
    extent: Span = field(default_factory=lambda: Span(1, 1, 0, 0))
