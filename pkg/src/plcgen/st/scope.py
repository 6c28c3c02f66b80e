"""Shallow semantic checks: scope resolution, call arity, unknown types.

No type inference. Quoted identifiers ("RED BTN") and direct addresses (%QX0.0)
resolve against external symbol tables that live outside the source file, so they
are always considered declared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from plcgen.st import ast
from plcgen.st import diagnostics as dcodes
from plcgen.st.diagnostics import Diagnostic

ELEMENTARY_TYPES = frozenset(
    {
        "bool",
        "byte",
        "word",
        "dword",
        "lword",
        "sint",
        "int",
        "dint",
        "lint",
        "usint",
        "uint",
        "udint",
        "ulint",
        "real",
        "lreal",
        "time",
        "ltime",
        "date",
        "time_of_day",
        "tod",
        "date_and_time",
        "dt",
        "char",
        "wchar",
        "string",
        "wstring",
    }
)

# Standard function blocks: name -> (input params, output params)
STANDARD_FUNCTION_BLOCKS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "ton": (("in", "pt"), ("q", "et")),
    "tof": (("in", "pt"), ("q", "et")),
    "tp": (("in", "pt"), ("q", "et")),
    "ctu": (("cu", "r", "pv"), ("q", "cv")),
    "ctd": (("cd", "ld", "pv"), ("q", "cv")),
    "ctud": (("cu", "cd", "r", "ld", "pv"), ("qu", "qd", "cv")),
    "r_trig": (("clk",), ("q",)),
    "f_trig": (("clk",), ("q",)),
    "sr": (("s1", "r"), ("q1",)),
    "rs": (("s", "r1"), ("q1",)),
}

# Standard functions: name -> (min arity, max arity or None for extensible)
STANDARD_FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "abs": (1, 1),
    "sqrt": (1, 1),
    "ln": (1, 1),
    "log": (1, 1),
    "exp": (1, 1),
    "expt": (2, 2),
    "sin": (1, 1),
    "cos": (1, 1),
    "tan": (1, 1),
    "asin": (1, 1),
    "acos": (1, 1),
    "atan": (1, 1),
    "trunc": (1, 1),
    "add": (2, None),
    "mul": (2, None),
    "sub": (2, 2),
    "div": (2, 2),
    "min": (2, None),
    "max": (2, None),
    "limit": (3, 3),
    "sel": (3, 3),
    "mux": (3, None),
    "shl": (2, 2),
    "shr": (2, 2),
    "rol": (2, 2),
    "ror": (2, 2),
    "len": (1, 1),
    "left": (2, 2),
    "right": (2, 2),
    "mid": (3, 3),
    "concat": (2, None),
    "insert": (3, 3),
    "delete": (3, 3),
    "replace": (4, 4),
    "find": (2, 2),
}

_CONVERSION = re.compile(r"^([a-z_]+)_to_([a-z_]+)$")


def is_standard_conversion(key: str) -> bool:
    m = _CONVERSION.match(key)
    if not m:
        return False
    return m.group(1) in ELEMENTARY_TYPES and m.group(2) in ELEMENTARY_TYPES


@dataclass
class _PouInterface:
    kind: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    inouts: list[str] = field(default_factory=list)
    required: int = 0  # inputs without default values

    @property
    def all_params(self) -> set[str]:
        return set(self.inputs) | set(self.outputs) | set(self.inouts)


class _Resolver:
    def __init__(self, tree: ast.SyntaxTree):
        self.tree = tree
        self.diags: list[Diagnostic] = []
        self.types: dict[str, ast.TypeDecl] = {}
        self.enum_members: set[str] = set()
        self.pous: dict[str, _PouInterface] = {}
        self.globals: dict[str, ast.TypeRef] = {}

    def error(self, code: str, message: str, extent, hint: str | None = None) -> None:
        self.diags.append(
            Diagnostic(code, "error", message, extent.line, extent.column, hint)
        )

    # -- symbol collection ------------------------------------------------------

    def collect(self) -> None:
        for tdecl in self.tree.types:
            key = tdecl.name.lower()
            if key in self.types:
                self.error(
                    dcodes.DUPLICATE_DECLARATION,
                    f"duplicate type declaration '{tdecl.name}'",
                    tdecl.extent,
                )
            else:
                self.types[key] = tdecl
            self.register_enums(tdecl.type)
        for block in self.tree.globals:
            for decl in block.decls:
                self.register_enums(decl.type)
                for name in decl.names:
                    key = name.lower()
                    if key in self.globals:
                        self.error(
                            dcodes.DUPLICATE_DECLARATION,
                            f"duplicate global variable '{name}'",
                            decl.extent,
                        )
                    self.globals[key] = decl.type
        for pou in self.tree.pous:
            key = pou.name.lower()
            if key in self.pous:
                self.error(
                    dcodes.DUPLICATE_DECLARATION,
                    f"duplicate declaration of '{pou.name}'",
                    pou.extent,
                )
                continue
            iface = _PouInterface(pou.kind)
            for block in pou.var_blocks:
                names = [n.lower() for d in block.decls for n in d.names]
                if block.kind == "VAR_INPUT":
                    iface.inputs.extend(names)
                    iface.required += sum(
                        len(d.names) for d in block.decls if d.init is None
                    )
                elif block.kind == "VAR_OUTPUT":
                    iface.outputs.extend(names)
                elif block.kind == "VAR_IN_OUT":
                    iface.inouts.extend(names)
            self.pous[key] = iface

    def register_enums(self, ty: ast.TypeRef) -> None:
        if isinstance(ty, ast.EnumType):
            for member in ty.members:
                self.enum_members.add(member.lower())
        elif isinstance(ty, ast.ArrayType):
            self.register_enums(ty.element)
        elif isinstance(ty, ast.StructType):
            for f in ty.fields:
                self.register_enums(f.type)

    # -- type references -----------------------------------------------------------

    def check_type(self, ty: ast.TypeRef) -> None:
        if isinstance(ty, ast.NamedType):
            key = ty.key
            if (
                key in ELEMENTARY_TYPES
                or key in self.types
                or key in STANDARD_FUNCTION_BLOCKS
                or (key in self.pous and self.pous[key].kind == "FUNCTION_BLOCK")
            ):
                return
            self.error(dcodes.UNKNOWN_TYPE, f"unknown type '{ty.name}'", ty.extent)
        elif isinstance(ty, ast.ArrayType):
            self.check_type(ty.element)
        elif isinstance(ty, ast.StructType):
            for f in ty.fields:
                self.check_type(f.type)

    # -- per-POU walk ------------------------------------------------------------

    def check_pou(self, pou: ast.Pou) -> None:
        local_types: dict[str, ast.TypeRef] = {}
        for block in pou.var_blocks:
            for decl in block.decls:
                self.check_type(decl.type)
                self.register_enums(decl.type)
                for name in decl.names:
                    key = name.lower()
                    if key in local_types:
                        self.error(
                            dcodes.DUPLICATE_DECLARATION,
                            f"duplicate declaration of '{name}' in {pou.kind} "
                            f"'{pou.name}'",
                            decl.extent,
                        )
                    local_types[key] = decl.type
                if decl.init is not None:
                    self.check_expr(decl.init, local_types, pou)
        if pou.kind == "FUNCTION":
            # the function name is the implicit result variable
            local_types.setdefault(pou.name.lower(), pou.return_type or ast.ErrorType(pou.extent))
            if pou.return_type is not None:
                self.check_type(pou.return_type)
        for stmt in pou.body:
            self.check_stmt(stmt, local_types, pou)

    def declared(self, key: str, local_types: dict[str, ast.TypeRef]) -> bool:
        return (
            key in local_types
            or key in self.globals
            or key in self.enum_members
            or key in self.pous
            or key in STANDARD_FUNCTIONS
            or key in STANDARD_FUNCTION_BLOCKS
            or is_standard_conversion(key)
        )

    def check_name(self, name: ast.Name, local_types, pou: ast.Pou) -> None:
        if name.quoted or name.direct:
            return
        key = name.key
        if self.declared(key, local_types):
            return
        hint = None
        candidates = sorted(set(local_types) | set(self.globals) | self.enum_members)
        close = _closest(key, candidates)
        if close is not None:
            hint = f"did you mean '{close}'?"
        self.error(
            dcodes.UNDECLARED_IDENTIFIER,
            f"undeclared identifier '{name.text}'",
            name.extent,
            hint,
        )

    def check_stmt(self, stmt: ast.Stmt, local_types, pou: ast.Pou) -> None:
        if isinstance(stmt, ast.Assign):
            self.check_expr(stmt.target, local_types, pou)
            self.check_expr(stmt.value, local_types, pou)
        elif isinstance(stmt, ast.CallStmt):
            self.check_call(stmt.call, local_types, pou, statement=True)
        elif isinstance(stmt, ast.If):
            for branch in stmt.branches:
                self.check_expr(branch.condition, local_types, pou)
                for s in branch.body:
                    self.check_stmt(s, local_types, pou)
            for s in stmt.else_body or []:
                self.check_stmt(s, local_types, pou)
        elif isinstance(stmt, ast.Case):
            self.check_expr(stmt.selector, local_types, pou)
            for entry in stmt.entries:
                for label in entry.labels:
                    self.check_expr(label.low, local_types, pou)
                    if label.high is not None:
                        self.check_expr(label.high, local_types, pou)
                for s in entry.body:
                    self.check_stmt(s, local_types, pou)
            for s in stmt.else_body or []:
                self.check_stmt(s, local_types, pou)
        elif isinstance(stmt, ast.For):
            self.check_name(stmt.var, local_types, pou)
            self.check_expr(stmt.start, local_types, pou)
            self.check_expr(stmt.stop, local_types, pou)
            if stmt.step is not None:
                self.check_expr(stmt.step, local_types, pou)
            for s in stmt.body:
                self.check_stmt(s, local_types, pou)
        elif isinstance(stmt, ast.While):
            self.check_expr(stmt.condition, local_types, pou)
            for s in stmt.body:
                self.check_stmt(s, local_types, pou)
        elif isinstance(stmt, ast.RepeatUntil):
            for s in stmt.body:
                self.check_stmt(s, local_types, pou)
            self.check_expr(stmt.condition, local_types, pou)

    def check_expr(self, expr: ast.Expr, local_types, pou: ast.Pou) -> None:
        if isinstance(expr, ast.Name):
            self.check_name(expr, local_types, pou)
        elif isinstance(expr, ast.Member):
            # only the base of a dotted path is resolvable without type inference
            self.check_expr(expr.base, local_types, pou)
        elif isinstance(expr, ast.Index):
            self.check_expr(expr.base, local_types, pou)
            for sub in expr.subscripts:
                self.check_expr(sub, local_types, pou)
        elif isinstance(expr, ast.Unary):
            self.check_expr(expr.operand, local_types, pou)
        elif isinstance(expr, ast.Binary):
            self.check_expr(expr.left, local_types, pou)
            self.check_expr(expr.right, local_types, pou)
        elif isinstance(expr, ast.Call):
            self.check_call(expr, local_types, pou, statement=False)
        elif isinstance(expr, (ast.ArrayInit,)):
            for item in expr.items:
                self.check_expr(item, local_types, pou)
        elif isinstance(expr, ast.RepeatInit):
            self.check_expr(expr.count, local_types, pou)
            self.check_expr(expr.value, local_types, pou)

    # -- calls ------------------------------------------------------------------

    def check_call(self, call: ast.Call, local_types, pou: ast.Pou, statement: bool) -> None:
        for arg in call.args:
            self.check_expr(arg.value, local_types, pou)
        if not isinstance(call.target, ast.Name):
            self.check_expr(call.target, local_types, pou)
            return
        name = call.target
        if name.quoted or name.direct:
            return
        key = name.key
        positional = sum(1 for a in call.args if a.name is None)
        named = [a for a in call.args if a.name is not None]
        total = len(call.args)

        # A declared variable shadows POU names and the standard tables, so an
        # instance invocation is resolved before anything else.
        instance_type = local_types.get(key) or self.globals.get(key)
        if instance_type is not None:
            if not statement and self.instance_interface(instance_type) is not None:
                # calling an FB instance inside an expression is not supported ST
                self.error(
                    dcodes.NOT_CALLABLE,
                    f"function block instance '{name.text}' cannot be used as a function",
                    call.extent,
                )
                return
            iface = self.instance_interface(instance_type)
            if iface is None:
                return
            inputs, outputs = iface
            params = set(inputs) | set(outputs)
            for arg in named:
                if arg.name.lower() not in params:
                    self.error(
                        dcodes.UNKNOWN_PARAMETER,
                        f"unknown parameter '{arg.name}' in call to '{name.text}'",
                        arg.extent,
                    )
            if positional and not named and positional > len(inputs):
                self.error(
                    dcodes.WRONG_ARITY,
                    f"wrong number of arguments to '{name.text}' "
                    f"(expected at most {len(inputs)}, got {positional})",
                    call.extent,
                )
            return

        if key in STANDARD_FUNCTIONS:
            lo, hi = STANDARD_FUNCTIONS[key]
            if total < lo or (hi is not None and total > hi):
                expect = str(lo) if hi == lo else (f"{lo}..{hi}" if hi else f"at least {lo}")
                self.error(
                    dcodes.WRONG_ARITY,
                    f"wrong number of arguments to '{name.text}' "
                    f"(expected {expect}, got {total})",
                    call.extent,
                )
            return
        if is_standard_conversion(key):
            if total != 1:
                self.error(
                    dcodes.WRONG_ARITY,
                    f"wrong number of arguments to '{name.text}' (expected 1, got {total})",
                    call.extent,
                )
            return
        if key in STANDARD_FUNCTION_BLOCKS or (
            key in self.pous and self.pous[key].kind == "FUNCTION_BLOCK"
        ):
            # a function block type must be invoked through a declared instance
            self.error(
                dcodes.NOT_CALLABLE,
                f"'{name.text}' is a function block type and needs a declared instance",
                call.extent,
                hint=f"declare 'myInstance : {name.text};' and invoke the instance",
            )
            return
        if key in self.pous and self.pous[key].kind == "FUNCTION":
            iface = self.pous[key]
            if named:
                for arg in named:
                    if arg.name.lower() not in iface.all_params:
                        self.error(
                            dcodes.UNKNOWN_PARAMETER,
                            f"unknown parameter '{arg.name}' in call to '{name.text}'",
                            arg.extent,
                        )
            if positional and not named:
                if positional > len(iface.inputs) + len(iface.inouts) or positional < min(
                    iface.required, len(iface.inputs)
                ):
                    self.error(
                        dcodes.WRONG_ARITY,
                        f"wrong number of arguments to '{name.text}' "
                        f"(expected {len(iface.inputs) + len(iface.inouts)}, got {positional})",
                        call.extent,
                    )
            return
        if key in self.pous:  # PROGRAM: not callable
            self.error(
                dcodes.NOT_CALLABLE,
                f"'{name.text}' is a PROGRAM and cannot be called",
                call.extent,
            )
            return
        self.check_name(name, local_types, pou)

    def instance_interface(
        self, ty: ast.TypeRef
    ) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
        if not isinstance(ty, ast.NamedType):
            return None
        key = ty.key
        if key in STANDARD_FUNCTION_BLOCKS:
            return STANDARD_FUNCTION_BLOCKS[key]
        iface = self.pous.get(key)
        if iface is not None and iface.kind == "FUNCTION_BLOCK":
            return (
                tuple(iface.inputs) + tuple(iface.inouts),
                tuple(iface.outputs),
            )
        alias = self.types.get(key)
        if alias is not None and isinstance(alias.type, ast.NamedType):
            return self.instance_interface(alias.type)
        return None

    def run(self) -> list[Diagnostic]:
        self.collect()
        for tdecl in self.tree.types:
            self.check_type(tdecl.type)
        for block in self.tree.globals:
            for decl in block.decls:
                self.check_type(decl.type)
        for pou in self.tree.pous:
            self.check_pou(pou)
        return self.diags


def _closest(key: str, candidates: list[str]) -> str | None:
    """Deterministic near-miss suggestion: smallest edit distance within 2, ties
    broken alphabetically."""
    best: tuple[int, str] | None = None
    for cand in candidates:
        if abs(len(cand) - len(key)) > 2:
            continue
        dist = _edit_distance(key, cand, cap=2)
        if dist is None or dist == 0:
            continue
        if best is None or (dist, cand) < best:
            best = (dist, cand)
    return best[1] if best else None


def _edit_distance(a: str, b: str, cap: int) -> int | None:
    if a == b:
        return 0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if min(cur) > cap:
            return None
        prev = cur
    return prev[-1] if prev[-1] <= cap else None


def resolve(tree: ast.SyntaxTree) -> list[Diagnostic]:
    """Run scope and arity checks over a parsed tree."""
    return _Resolver(tree).run()
