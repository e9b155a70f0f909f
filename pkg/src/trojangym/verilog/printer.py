"""Canonical pretty-printer.

Output is normalized: ANSI port headers, four-space indent, every compound
subexpression parenthesized. Printing then reparsing yields a structurally
equal tree, which is what the round-trip gate checks.
"""

from __future__ import annotations

from typing import List

from . import nodes as n

_INDENT = "    "

_ATOMS = (n.Ident, n.Number, n.StringLit, n.Concat, n.Repl, n.Call)


def expr_text(expr) -> str:
    """Expression as source text, parenthesizing operators."""
    if isinstance(expr, n.Ident):
        return expr.name
    if isinstance(expr, n.Number):
        return expr.canonical()
    if isinstance(expr, n.StringLit):
        return '"%s"' % expr.text
    if isinstance(expr, n.Unary):
        return f"({expr.op}{_operand(expr.operand)})"
    if isinstance(expr, n.Binary):
        return f"({_operand(expr.lhs)} {expr.op} {_operand(expr.rhs)})"
    if isinstance(expr, n.Ternary):
        return (f"({_operand(expr.cond)} ? {_operand(expr.then)}"
                f" : {_operand(expr.other)})")
    if isinstance(expr, n.Concat):
        return "{%s}" % ", ".join(expr_text(p) for p in expr.parts)
    if isinstance(expr, n.Repl):
        # the replication braces double as the inner concat's braces
        if isinstance(expr.value, n.Concat):
            inner = ", ".join(expr_text(p) for p in expr.value.parts)
        else:
            inner = expr_text(expr.value)
        return "{%s{%s}}" % (expr_text(expr.count), inner)
    if isinstance(expr, n.BitSelect):
        return f"{_sel_base(expr.base)}[{inner_text(expr.index)}]"
    if isinstance(expr, n.PartSelect):
        if expr.mode == ":":
            return (f"{_sel_base(expr.base)}[{inner_text(expr.left)}"
                    f":{inner_text(expr.right)}]")
        return (f"{_sel_base(expr.base)}[{inner_text(expr.left)}"
                f"{expr.mode}{inner_text(expr.right)}]")
    if isinstance(expr, n.Call):
        args = ", ".join(expr_text(a) for a in expr.args)
        return f"{expr.name}({args})"
    raise TypeError(f"cannot print expression node {type(expr).__name__}")


def _operand(expr) -> str:
    return expr_text(expr)  # compound nodes carry their own parentheses


def inner_text(expr) -> str:
    """Like expr_text but without the outermost parentheses; safe wherever
    the expression is already delimited (conditions, RHS, brackets)."""
    if isinstance(expr, n.Unary):
        return f"{expr.op}{_operand(expr.operand)}"
    if isinstance(expr, n.Binary):
        return f"{_operand(expr.lhs)} {expr.op} {_operand(expr.rhs)}"
    if isinstance(expr, n.Ternary):
        return (f"{_operand(expr.cond)} ? {_operand(expr.then)}"
                f" : {_operand(expr.other)}")
    return expr_text(expr)


def _sel_base(expr) -> str:
    if isinstance(expr, (n.Ident, n.BitSelect, n.PartSelect)):
        return expr_text(expr)
    return expr_text(expr) if isinstance(expr, n.Concat) else f"({expr_text(expr)})"


def _range_text(rng) -> str:
    return f"[{inner_text(rng.msb)}:{inner_text(rng.lsb)}]"


def _port_text(port: n.Port) -> str:
    kind = "reg" if port.is_reg else "wire"
    parts = [port.direction, kind]
    if port.signed:
        parts.append("signed")
    if port.range is not None:
        parts.append(_range_text(port.range))
    parts.append(port.name)
    return " ".join(parts)


def print_stmt(stmt, out: List[str], depth: int) -> None:
    pad = _INDENT * depth
    if isinstance(stmt, n.Block):
        out.append(pad + "begin")
        for s in stmt.stmts:
            print_stmt(s, out, depth + 1)
        out.append(pad + "end")
    elif isinstance(stmt, n.Assign):
        op = "=" if stmt.blocking else "<="
        out.append(f"{pad}{expr_text(stmt.target)} {op} {inner_text(stmt.value)};")
    elif isinstance(stmt, n.IfStmt):
        _headed_body(f"if ({inner_text(stmt.cond)})", stmt.then, out, depth)
        if stmt.other is not None:
            if isinstance(stmt.other, n.IfStmt):
                chained: List[str] = []
                print_stmt(stmt.other, chained, depth)
                chained[0] = pad + "else " + chained[0].lstrip()
                out.extend(chained)
            else:
                _headed_body("else", stmt.other, out, depth)
    elif isinstance(stmt, n.CaseStmt):
        out.append(f"{pad}{stmt.kind} ({inner_text(stmt.subject)})")
        for item in stmt.items:
            if item.labels is None:
                head = "default:"
            else:
                head = ", ".join(expr_text(x) for x in item.labels) + ":"
            if isinstance(item.body, n.Block):
                out.append(pad + _INDENT + head)
                print_stmt(item.body, out, depth + 1)
            else:
                body: List[str] = []
                print_stmt(item.body, body, 0)
                out.append(pad + _INDENT + head + " " + body[0])
                out.extend(pad + _INDENT + line for line in body[1:])
        out.append(pad + "endcase")
    elif isinstance(stmt, n.SysTask):
        args = ", ".join(inner_text(a) for a in stmt.args)
        tail = f"({args})" if stmt.args else ""
        out.append(f"{pad}{stmt.name}{tail};")
    elif isinstance(stmt, n.NullStmt):
        out.append(pad + ";")
    else:
        raise TypeError(f"cannot print statement node {type(stmt).__name__}")


def _headed_body(header: str, body, out: List[str], depth: int) -> None:
    """`header begin ... end` when the body is a block, else an indented line."""
    pad = _INDENT * depth
    if isinstance(body, n.Block):
        out.append(pad + header + " begin")
        for s in body.stmts:
            print_stmt(s, out, depth + 1)
        out.append(pad + "end")
    else:
        out.append(pad + header)
        print_stmt(body, out, depth + 1)


def print_item(item, out: List[str], depth: int) -> None:
    pad = _INDENT * depth
    if isinstance(item, n.NetDecl):
        parts = [item.kind]
        if item.signed and item.kind != "integer":
            parts.append("signed")
        if item.range is not None:
            parts.append(_range_text(item.range))
        names = item.names
        if item.array is not None:
            names = [f"{nm} {_range_text(item.array)}" for nm in names]
        out.append(pad + " ".join(parts) + " " + ", ".join(names) + ";")
    elif isinstance(item, n.ParamDecl):
        rng = f" {_range_text(item.range)}" if item.range is not None else ""
        out.append(f"{pad}{item.kind}{rng} {item.name} = {inner_text(item.value)};")
    elif isinstance(item, n.ContAssign):
        out.append(f"{pad}assign {expr_text(item.target)} = {inner_text(item.value)};")
    elif isinstance(item, n.ProcBlock):
        head = item.kind
        if item.kind == "always":
            if item.sensitivity:
                sens = " or ".join(
                    (f"{s.edge} " if s.edge else "") + expr_text(s.signal)
                    for s in item.sensitivity)
                head += f" @({sens})"
            else:
                head += " @(*)"
        _headed_body(head, item.body, out, depth)
    elif isinstance(item, n.Instance):
        head = item.module_name
        if item.param_overrides:
            head += " #(%s)" % ", ".join(_conn_text(c) for c in item.param_overrides)
        head += f" {item.instance_name} ("
        out.append(pad + head)
        for i, conn in enumerate(item.ports):
            comma = "," if i + 1 < len(item.ports) else ""
            out.append(pad + _INDENT + _conn_text(conn) + comma)
        out.append(pad + ");")
    elif isinstance(item, n.UnsupportedItem):
        out.append(pad + item.text)
    else:
        raise TypeError(f"cannot print module item {type(item).__name__}")


def _conn_text(conn: n.PortConn) -> str:
    expr = inner_text(conn.expr) if conn.expr is not None else ""
    if conn.port is None:
        return expr
    return f".{conn.port}({expr})"


def print_module(mod: n.ModuleDecl) -> str:
    out: List[str] = []
    head = f"module {mod.name}"
    if mod.params:
        out.append(head + " #(")
        for i, prm in enumerate(mod.params):
            rng = f" {_range_text(prm.range)}" if prm.range is not None else ""
            comma = "," if i + 1 < len(mod.params) else ""
            out.append(f"{_INDENT}parameter{rng} {prm.name} = "
                       f"{inner_text(prm.value)}{comma}")
        head = ")"
    if mod.ports:
        out.append(head + " (")
        for i, port in enumerate(mod.ports):
            comma = "," if i + 1 < len(mod.ports) else ""
            out.append(_INDENT + _port_text(port) + comma)
        out.append(");")
    else:
        out.append(head + ("();" if mod.params else ";"))
    for item in mod.items:
        print_item(item, out, 1)
    out.append("endmodule")
    return "\n".join(out) + "\n"


def print_ast(ast: n.Ast) -> str:
    return "\n".join(print_module(m) for m in ast.modules)
