"""Compile gate: lex + parse + synthesizability and width checks.

``syntax_check`` is the hermetic default used everywhere in the pipeline;
``external_check`` optionally adapts a real compiler's stderr instead.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

from . import nodes as n
from .diagnostics import (
    CheckReport,
    Diagnostic,
    E_EXTERNAL,
    E_INTERFACE,
    E_NONSYNTH,
    E_NO_MODULE,
    E_UNSUPPORTED,
    E_WIDTH_MISMATCH,
    Severity,
    W_EXTERNAL,
    W_WIDTH,
    sort_diagnostics,
)
from .parser import iter_stmt_exprs, parse_source
from .printer import expr_text
from .widths import (
    FLEX,
    HARD,
    array_names,
    declared_widths,
    infer_width,
    param_env,
)

# $ functions that map onto synthesizable operators
_SYNTH_CALLS = {"$signed", "$unsigned", "$clog2"}


def syntax_check(source: str) -> CheckReport:
    """Full front-end check; ok means the design compiles in the subset."""
    result = parse_source(source)
    diags = list(result.diagnostics)
    if result.ast is not None:
        if not result.ast.modules:
            diags.append(Diagnostic(Severity.ERROR, E_NO_MODULE, 1, 1,
                                    "no module declaration found"))
        for mod in result.ast.modules:
            diags.extend(check_module(mod))
    return CheckReport.from_diagnostics(sort_diagnostics(diags))


def check_module(mod: n.ModuleDecl) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    diags.extend(_nonsynth_scan(mod))
    diags.extend(_width_scan(mod))
    return diags


def _nonsynth_scan(mod: n.ModuleDecl) -> List[Diagnostic]:
    diags: List[Diagnostic] = []

    def scan_stmt(stmt) -> None:
        if isinstance(stmt, n.SysTask):
            diags.append(Diagnostic(
                Severity.ERROR, E_NONSYNTH, stmt.line, stmt.col,
                f"system task '{stmt.name}' is not synthesizable"))
        elif isinstance(stmt, n.Block):
            for s in stmt.stmts:
                scan_stmt(s)
        elif isinstance(stmt, n.IfStmt):
            scan_stmt(stmt.then)
            if stmt.other is not None:
                scan_stmt(stmt.other)
        elif isinstance(stmt, n.CaseStmt):
            for item in stmt.items:
                scan_stmt(item.body)

    for item in mod.items:
        if isinstance(item, n.UnsupportedItem):
            diags.append(Diagnostic(
                Severity.ERROR, E_UNSUPPORTED, item.line, item.col,
                f"'{item.keyword}' construct is outside the supported subset"))
        elif isinstance(item, n.ProcBlock):
            if item.kind == "initial":
                diags.append(Diagnostic(
                    Severity.ERROR, E_NONSYNTH, item.line, item.col,
                    "initial block is not synthesizable"))
            scan_stmt(item.body)

    for expr in _all_exprs(mod):
        for call in _iter_calls(expr):
            if call.name.startswith("$") and call.name not in _SYNTH_CALLS:
                diags.append(Diagnostic(
                    Severity.ERROR, E_NONSYNTH, call.line, call.col,
                    f"system function '{call.name}' is not synthesizable"))
    return diags


def _width_scan(mod: n.ModuleDecl) -> List[Diagnostic]:
    env = param_env(mod)
    widths = declared_widths(mod, env)
    arrays = array_names(mod)
    params = {p.name for p in mod.params}
    params.update(i.name for i in mod.items if isinstance(i, n.ParamDecl))
    diags: List[Diagnostic] = []

    def check_assign(target, value, line: int, col: int) -> None:
        lw, _ = infer_width(target, widths, params, env, arrays)
        rw, klass = infer_width(value, widths, params, env, arrays)
        if lw is None or rw is None or lw == rw or klass is FLEX:
            return
        text = expr_text(target)
        if klass is HARD:
            diags.append(Diagnostic(
                Severity.ERROR, E_WIDTH_MISMATCH, line, col,
                f"width mismatch: '{text}' is {lw} bits but the expression"
                f" is {rw} bits"))
        elif rw > lw:
            diags.append(Diagnostic(
                Severity.WARNING, W_WIDTH, line, col,
                f"expression may be truncated: '{text}' is {lw} bits but the"
                f" expression is {rw} bits"))

    def scan_stmt(stmt) -> None:
        if isinstance(stmt, n.Assign):
            check_assign(stmt.target, stmt.value, stmt.line, stmt.col)
        elif isinstance(stmt, n.Block):
            for s in stmt.stmts:
                scan_stmt(s)
        elif isinstance(stmt, n.IfStmt):
            scan_stmt(stmt.then)
            if stmt.other is not None:
                scan_stmt(stmt.other)
        elif isinstance(stmt, n.CaseStmt):
            for item in stmt.items:
                scan_stmt(item.body)

    for item in mod.items:
        if isinstance(item, n.ContAssign):
            check_assign(item.target, item.value, item.line, item.col)
        elif isinstance(item, n.ProcBlock):
            scan_stmt(item.body)
    return diags


def _all_exprs(mod: n.ModuleDecl):
    for item in mod.items:
        if isinstance(item, n.ContAssign):
            yield item.target
            yield item.value
        elif isinstance(item, n.ProcBlock):
            yield from iter_stmt_exprs(item.body)
        elif isinstance(item, n.Instance):
            for conn in item.param_overrides + item.ports:
                if conn.expr is not None:
                    yield conn.expr


def _iter_calls(expr):
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, n.Call):
            yield node
            stack.extend(node.args)
        elif isinstance(node, n.Unary):
            stack.append(node.operand)
        elif isinstance(node, n.Binary):
            stack.extend((node.lhs, node.rhs))
        elif isinstance(node, n.Ternary):
            stack.extend((node.cond, node.then, node.other))
        elif isinstance(node, (n.Concat,)):
            stack.extend(node.parts)
        elif isinstance(node, n.Repl):
            stack.extend((node.count, node.value))
        elif isinstance(node, n.BitSelect):
            stack.extend((node.base, node.index))
        elif isinstance(node, n.PartSelect):
            stack.extend((node.base, node.left, node.right))


# --- interface preservation --------------------------------------------------

def interface_diagnostics(expected: tuple, mod: n.ModuleDecl) -> List[Diagnostic]:
    """Compare a module's port signature against the baseline's."""
    actual = n.port_signature(mod)
    if actual == expected:
        return []
    exp_map = {name: (d, b) for name, d, b in expected}
    act_map = {name: (d, b) for name, d, b in actual}
    diags: List[Diagnostic] = []
    for name, (d, b) in exp_map.items():
        if name not in act_map:
            diags.append(Diagnostic(Severity.ERROR, E_INTERFACE, mod.line, mod.col,
                                    f"port '{name}' is missing"))
        elif act_map[name] != (d, b):
            diags.append(Diagnostic(Severity.ERROR, E_INTERFACE, mod.line, mod.col,
                                    f"port '{name}' changed direction or width"))
    for name in act_map:
        if name not in exp_map:
            diags.append(Diagnostic(Severity.ERROR, E_INTERFACE, mod.line, mod.col,
                                    f"unexpected new port '{name}'"))
    if not diags:
        diags.append(Diagnostic(Severity.ERROR, E_INTERFACE, mod.line, mod.col,
                                "port order changed"))
    return diags


# --- external compiler adapter ------------------------------------------------

_EXTERNAL_LINE = re.compile(
    r"^(?P<file>[^:]+):(?P<line>\d+):\s*(?P<kind>error|warning)?:?\s*(?P<msg>.*)$")


def external_check(source: str, command: str,
                   timeout_s: float = 30.0) -> CheckReport:
    """Run a user-configured compiler and adapt its stderr to Diagnostics.

    The command is a shell-style string; the temp file holding ``source``
    is appended as its last argument. Nonzero exit with unparsable output
    still yields a failing report.
    """
    with tempfile.NamedTemporaryFile("w", suffix=".v", delete=False) as fh:
        fh.write(source)
        path = fh.name
    try:
        proc = subprocess.run(shlex.split(command) + [path],
                              capture_output=True, text=True, timeout=timeout_s)
    finally:
        Path(path).unlink(missing_ok=True)
    diags: List[Diagnostic] = []
    for raw in (proc.stderr or "").splitlines():
        m = _EXTERNAL_LINE.match(raw.strip())
        if not m:
            continue
        warn = (m.group("kind") or "error") == "warning"
        diags.append(Diagnostic(
            Severity.WARNING if warn else Severity.ERROR,
            W_EXTERNAL if warn else E_EXTERNAL,
            int(m.group("line")), 1, m.group("msg").strip()))
    if proc.returncode != 0 and not any(d.severity is Severity.ERROR for d in diags):
        diags.append(Diagnostic(
            Severity.ERROR, E_EXTERNAL, 1, 1,
            f"compiler exited with status {proc.returncode}"))
    return CheckReport.from_diagnostics(sort_diagnostics(diags))


def parse_for_top(source: str) -> Optional[n.ModuleDecl]:
    """First module of a clean parse, else None; the pipeline's 'top'."""
    result = parse_source(source)
    if result.ast is None or not result.ast.modules:
        return None
    return result.ast.modules[0]
