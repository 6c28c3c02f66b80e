"""Render a syntax tree back to ST source.

Expressions are printed fully parenthesized, which keeps the printer independent of
the precedence table; a reprint of a clean tree must re-check clean.
"""

from __future__ import annotations

from plcgen.st import ast

_INDENT = "  "


def to_source(tree: ast.SyntaxTree) -> str:
    parts: list[str] = []
    if tree.types:
        parts.append("TYPE")
        for tdecl in tree.types:
            parts.append(f"{_INDENT}{tdecl.name} : {_type(tdecl.type)};")
        parts.append("END_TYPE")
        parts.append("")
    for block in tree.globals:
        parts.extend(_var_block(block))
        parts.append("")
    for pou in tree.pous:
        parts.extend(_pou(pou))
        parts.append("")
    return "\n".join(parts).rstrip("\n") + "\n" if parts else ""


def _pou(pou: ast.Pou) -> list[str]:
    head = f"{pou.kind} {pou.name}"
    if pou.kind == "FUNCTION" and pou.return_type is not None:
        head += f" : {_type(pou.return_type)}"
    lines = [head]
    for block in pou.var_blocks:
        lines.extend(_var_block(block))
    lines.append("")
    lines.extend(_stmts(pou.body, 1))
    closer = {
        "PROGRAM": "END_PROGRAM",
        "FUNCTION": "END_FUNCTION",
        "FUNCTION_BLOCK": "END_FUNCTION_BLOCK",
    }[pou.kind]
    lines.append(closer)
    return lines


def _var_block(block: ast.VarBlock) -> list[str]:
    head = block.kind
    if block.constant:
        head += " CONSTANT"
    if block.retain:
        head += " RETAIN"
    lines = [head]
    for decl in block.decls:
        entry = f"{_INDENT}{', '.join(decl.names)}"
        if decl.address:
            entry += f" AT {decl.address}"
        entry += f" : {_type(decl.type)}"
        if decl.init is not None:
            entry += f" := {_expr(decl.init)}"
        lines.append(entry + ";")
    lines.append("END_VAR")
    return lines


def _type(ty: ast.TypeRef) -> str:
    if isinstance(ty, ast.NamedType):
        return ty.name
    if isinstance(ty, ast.StringType):
        if ty.length is not None:
            return f"{ty.name}[{_expr(ty.length)}]"
        return ty.name
    if isinstance(ty, ast.ArrayType):
        dims = ", ".join(f"{_expr(lo)}..{_expr(hi)}" for lo, hi in ty.dims)
        return f"ARRAY[{dims}] OF {_type(ty.element)}"
    if isinstance(ty, ast.StructType):
        inner = " ".join(
            f"{', '.join(d.names)} : {_type(d.type)}"
            + (f" := {_expr(d.init)}" if d.init is not None else "")
            + ";"
            for d in ty.fields
        )
        return f"STRUCT {inner} END_STRUCT"
    if isinstance(ty, ast.EnumType):
        return f"({', '.join(ty.members)})"
    return "INT"  # ErrorType placeholder; never reached for clean trees


def _stmts(stmts: list[ast.Stmt], depth: int) -> list[str]:
    lines: list[str] = []
    pad = _INDENT * depth
    for stmt in stmts:
        lines.extend(_stmt(stmt, depth, pad))
    return lines


def _stmt(stmt: ast.Stmt, depth: int, pad: str) -> list[str]:
    if isinstance(stmt, ast.Assign):
        return [f"{pad}{_expr(stmt.target)} := {_expr(stmt.value)};"]
    if isinstance(stmt, ast.CallStmt):
        return [f"{pad}{_expr(stmt.call)};"]
    if isinstance(stmt, ast.If):
        lines = []
        for i, branch in enumerate(stmt.branches):
            kw = "IF" if i == 0 else "ELSIF"
            lines.append(f"{pad}{kw} {_expr(branch.condition)} THEN")
            lines.extend(_stmts(branch.body, depth + 1))
        if stmt.else_body is not None:
            lines.append(f"{pad}ELSE")
            lines.extend(_stmts(stmt.else_body, depth + 1))
        lines.append(f"{pad}END_IF;")
        return lines
    if isinstance(stmt, ast.Case):
        lines = [f"{pad}CASE {_expr(stmt.selector)} OF"]
        for entry in stmt.entries:
            labels = ", ".join(_label(lb) for lb in entry.labels)
            lines.append(f"{pad}{_INDENT}{labels}:")
            lines.extend(_stmts(entry.body, depth + 2))
        if stmt.else_body is not None:
            lines.append(f"{pad}ELSE")
            lines.extend(_stmts(stmt.else_body, depth + 1))
        lines.append(f"{pad}END_CASE;")
        return lines
    if isinstance(stmt, ast.For):
        head = f"{pad}FOR {stmt.var.text} := {_expr(stmt.start)} TO {_expr(stmt.stop)}"
        if stmt.step is not None:
            head += f" BY {_expr(stmt.step)}"
        head += " DO"
        return [head, *_stmts(stmt.body, depth + 1), f"{pad}END_FOR;"]
    if isinstance(stmt, ast.While):
        return [
            f"{pad}WHILE {_expr(stmt.condition)} DO",
            *_stmts(stmt.body, depth + 1),
            f"{pad}END_WHILE;",
        ]
    if isinstance(stmt, ast.RepeatUntil):
        return [
            f"{pad}REPEAT",
            *_stmts(stmt.body, depth + 1),
            f"{pad}UNTIL {_expr(stmt.condition)}",
            f"{pad}END_REPEAT;",
        ]
    if isinstance(stmt, ast.Exit):
        return [f"{pad}EXIT;"]
    if isinstance(stmt, ast.Return):
        return [f"{pad}RETURN;"]
    return []


def _label_expr(expr: ast.Expr) -> str:
    # Case labels only admit (possibly negated) literals and enum names, so the
    # general parenthesizing printer would produce text that no longer parses.
    if isinstance(expr, ast.Unary):
        return f"{expr.op}{_label_expr(expr.operand)}"
    return _expr(expr)


def _label(label: ast.CaseLabel) -> str:
    if label.high is not None:
        return f"{_label_expr(label.low)}..{_label_expr(label.high)}"
    return _label_expr(label.low)


def _expr(expr: ast.Expr) -> str:
    if isinstance(expr, ast.Literal):
        return expr.text
    if isinstance(expr, ast.Name):
        return expr.text
    if isinstance(expr, ast.Member):
        return f"{_expr(expr.base)}.{expr.field_name}"
    if isinstance(expr, ast.Index):
        subs = ", ".join(_expr(s) for s in expr.subscripts)
        return f"{_expr(expr.base)}[{subs}]"
    if isinstance(expr, ast.Unary):
        op = expr.op + " " if expr.op == "NOT" else expr.op
        return f"{op}({_expr(expr.operand)})"
    if isinstance(expr, ast.Binary):
        return f"({_expr(expr.left)} {expr.op} {_expr(expr.right)})"
    if isinstance(expr, ast.Call):
        args = ", ".join(_arg(a) for a in expr.args)
        return f"{_expr(expr.target)}({args})"
    if isinstance(expr, ast.ArrayInit):
        return f"[{', '.join(_expr(e) for e in expr.items)}]"
    if isinstance(expr, ast.RepeatInit):
        return f"{_expr(expr.count)}({_expr(expr.value)})"
    return "0"  # ErrorExpr placeholder; never reached for clean trees


def _arg(arg: ast.Arg) -> str:
    if arg.name is None:
        return _expr(arg.value)
    sep = "=>" if arg.direction == "out" else ":="
    return f"{arg.name} {sep} {_expr(arg.value)}"
