"""Ast -> Dfg extraction.

Mapping rules:

* one SIGNAL node per declared port/net/reg, in declaration order;
* one CONST node per distinct literal value (and per referenced parameter);
* one OP node per operator application, labeled by mnemonic;
* one BRANCH ("MUX") node per if/case statement and per ternary;
* edges run operand -> operator and driver -> assigned signal. Inside a
  branch, values feed the branch's MUX and the outermost MUX drives the
  assigned signals, so nested conditions chain inner MUX -> outer MUX.

Clock/reset names in sensitivity lists carry no data and contribute no
edges; the signals still appear as nodes via their declarations.
"""

from __future__ import annotations

import time
from typing import Dict, List, Optional, Set, Tuple

from ..verilog import nodes as vn
from .graph import Dfg, DfgNode, GraphMeta, NodeKind, UnsupportedConstructError

_BINARY_MNEMONIC = {
    "&": "AND", "|": "OR", "^": "XOR", "~^": "XNOR",
    "&&": "LAND", "||": "LOR",
    "+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "%": "MOD",
    "<<": "SHL", ">>": "SHR", ">>>": "ASHR",
    "<": "LT", "<=": "LE", ">": "GT", ">=": "GE",
    "==": "EQ", "!=": "NEQ", "===": "CASEEQ", "!==": "CASENEQ",
}

_UNARY_MNEMONIC = {
    "~": "NOT", "!": "LNOT", "-": "NEG", "+": "POS",
    "&": "RAND", "|": "ROR", "^": "RXOR",
    "~&": "RNAND", "~|": "RNOR", "~^": "RXNOR",
}


def const_label(num: vn.Number) -> str:
    """Literals normalized so equal (width, value) pairs share one node."""
    if num.width is not None:
        return f"{num.width}'h{num.value:x}"
    return str(num.value)


class _Builder:
    def __init__(self, mod: vn.ModuleDecl):
        self.mod = mod
        self.nodes: List[DfgNode] = []
        self.edge_set: Set[Tuple[int, int]] = set()
        self.signal_ids: Dict[str, int] = {}
        self.const_ids: Dict[str, int] = {}
        self.param_names: Set[str] = {p.name for p in mod.params}
        self.param_names.update(
            i.name for i in mod.items if isinstance(i, vn.ParamDecl))

    # --- node/edge plumbing ---

    def _new_node(self, kind: NodeKind, label: str) -> int:
        node_id = len(self.nodes)
        self.nodes.append(DfgNode(id=node_id, kind=kind, label=label))
        return node_id

    def edge(self, src: int, dst: int) -> None:
        if src != dst:
            self.edge_set.add((src, dst))

    def signal(self, name: str) -> int:
        return self.signal_ids[name]

    def const(self, label: str) -> int:
        if label not in self.const_ids:
            self.const_ids[label] = self._new_node(NodeKind.CONST, label)
        return self.const_ids[label]

    # --- construction ---

    def build(self) -> Dfg:
        for port in self.mod.ports:
            self.signal_ids[port.name] = self._new_node(NodeKind.SIGNAL, port.name)
        for item in self.mod.items:
            if isinstance(item, vn.NetDecl):
                for name in item.names:
                    if name not in self.signal_ids:
                        self.signal_ids[name] = self._new_node(NodeKind.SIGNAL, name)

        for item in self.mod.items:
            if isinstance(item, (vn.NetDecl, vn.ParamDecl)):
                continue
            if isinstance(item, vn.ContAssign):
                src = self.expr(item.value)
                for target in self.lvalue_signals(item.target):
                    self.edge(src, target)
            elif isinstance(item, vn.ProcBlock):
                self.stmt(item.body, mux_ctx=None)
            elif isinstance(item, vn.Instance):
                self.instance(item)
            elif isinstance(item, vn.UnsupportedItem):
                raise UnsupportedConstructError(
                    f"'{item.keyword}' construct has no graph mapping")
            else:
                raise UnsupportedConstructError(
                    f"{type(item).__name__} has no graph mapping")

        edges = sorted(self.edge_set)
        meta = GraphMeta(node_count=len(self.nodes), edge_count=len(edges))
        return Dfg(nodes=self.nodes, edges=edges, meta=meta)

    def instance(self, inst: vn.Instance) -> None:
        for i, conn in enumerate(inst.ports):
            port = conn.port if conn.port is not None else str(i)
            node = self._new_node(NodeKind.INSTANCE_PORT,
                                  f"{inst.module_name}.{port}")
            if conn.expr is None:
                continue
            src = self.expr(conn.expr)
            self.edge(src, node)
            if isinstance(conn.expr, vn.Ident) and conn.expr.name in self.signal_ids:
                # direction of the boundary is unknown; keep the signal
                # reachable from the port as well
                self.edge(node, self.signal(conn.expr.name))

    # --- statements ---

    def stmt(self, stmt, mux_ctx: Optional[int]) -> None:
        if isinstance(stmt, vn.Assign):
            src = self.expr(stmt.value)
            if mux_ctx is None:
                for target in self.lvalue_signals(stmt.target):
                    self.edge(src, target)
            else:
                self.edge(src, mux_ctx)
        elif isinstance(stmt, vn.Block):
            for s in stmt.stmts:
                self.stmt(s, mux_ctx)
        elif isinstance(stmt, vn.IfStmt):
            mux = self._new_node(NodeKind.BRANCH, "MUX")
            self.edge(self.expr(stmt.cond), mux)
            self.stmt(stmt.then, mux)
            if stmt.other is not None:
                self.stmt(stmt.other, mux)
            self._close_mux(mux, mux_ctx, (stmt.then, stmt.other))
        elif isinstance(stmt, vn.CaseStmt):
            mux = self._new_node(NodeKind.BRANCH, "MUX")
            self.edge(self.expr(stmt.subject), mux)
            bodies = []
            for item in stmt.items:
                for label in item.labels or []:
                    self.edge(self.expr(label), mux)
                self.stmt(item.body, mux)
                bodies.append(item.body)
            self._close_mux(mux, mux_ctx, tuple(bodies))
        elif isinstance(stmt, vn.NullStmt):
            pass
        elif isinstance(stmt, vn.SysTask):
            raise UnsupportedConstructError(
                f"system task '{stmt.name}' has no graph mapping")
        else:
            raise UnsupportedConstructError(
                f"{type(stmt).__name__} has no graph mapping")

    def _close_mux(self, mux: int, mux_ctx: Optional[int], bodies) -> None:
        if mux_ctx is not None:
            self.edge(mux, mux_ctx)
            return
        for name in self._assigned_under(bodies):
            self.edge(mux, self.signal(name))

    def _assigned_under(self, stmts) -> List[str]:
        """Base signals assigned anywhere below, first-assignment order."""
        seen: List[str] = []

        def walk(stmt) -> None:
            if stmt is None:
                return
            if isinstance(stmt, vn.Assign):
                for sig in self.lvalue_names(stmt.target):
                    if sig not in seen:
                        seen.append(sig)
            elif isinstance(stmt, vn.Block):
                for s in stmt.stmts:
                    walk(s)
            elif isinstance(stmt, vn.IfStmt):
                walk(stmt.then)
                walk(stmt.other)
            elif isinstance(stmt, vn.CaseStmt):
                for item in stmt.items:
                    walk(item.body)

        for stmt in stmts:
            walk(stmt)
        return seen

    # --- lvalues ---

    def lvalue_names(self, target) -> List[str]:
        if isinstance(target, vn.Ident):
            return [target.name]
        if isinstance(target, (vn.BitSelect, vn.PartSelect)):
            return self.lvalue_names(target.base)
        if isinstance(target, vn.Concat):
            names: List[str] = []
            for part in target.parts:
                names.extend(self.lvalue_names(part))
            return names
        raise UnsupportedConstructError(
            f"{type(target).__name__} cannot be an assignment target")

    def lvalue_signals(self, target) -> List[int]:
        return [self.signal(name) for name in self.lvalue_names(target)]

    # --- expressions ---

    def expr(self, e) -> int:
        if isinstance(e, vn.Ident):
            if e.name in self.param_names:
                return self.const(e.name)
            return self.signal(e.name)
        if isinstance(e, vn.Number):
            return self.const(const_label(e))
        if isinstance(e, vn.StringLit):
            return self.const(f'"{e.text}"')
        if isinstance(e, vn.Unary):
            op = self._new_node(NodeKind.OP, _UNARY_MNEMONIC[e.op])
            self.edge(self.expr(e.operand), op)
            return op
        if isinstance(e, vn.Binary):
            op = self._new_node(NodeKind.OP, _BINARY_MNEMONIC[e.op])
            self.edge(self.expr(e.lhs), op)
            self.edge(self.expr(e.rhs), op)
            return op
        if isinstance(e, vn.Ternary):
            mux = self._new_node(NodeKind.BRANCH, "MUX")
            self.edge(self.expr(e.cond), mux)
            self.edge(self.expr(e.then), mux)
            self.edge(self.expr(e.other), mux)
            return mux
        if isinstance(e, vn.Concat):
            op = self._new_node(NodeKind.OP, "CONCAT")
            for part in e.parts:
                self.edge(self.expr(part), op)
            return op
        if isinstance(e, vn.Repl):
            op = self._new_node(NodeKind.OP, "REPL")
            self.edge(self.expr(e.count), op)
            self.edge(self.expr(e.value), op)
            return op
        if isinstance(e, vn.BitSelect):
            op = self._new_node(NodeKind.OP, "BITSEL")
            self.edge(self.expr(e.base), op)
            self.edge(self.expr(e.index), op)
            return op
        if isinstance(e, vn.PartSelect):
            op = self._new_node(NodeKind.OP, "PARTSEL")
            self.edge(self.expr(e.base), op)
            self.edge(self.expr(e.left), op)
            self.edge(self.expr(e.right), op)
            return op
        if isinstance(e, vn.Call):
            op = self._new_node(NodeKind.OP, e.name.lstrip("$").upper())
            for arg in e.args:
                self.edge(self.expr(arg), op)
            return op
        raise UnsupportedConstructError(
            f"{type(e).__name__} has no graph mapping")


def build_dfg(ast: vn.Ast) -> Dfg:
    """Graph of the first (top) module; raises on constructs outside the
    mapping and on name lookups a clean parse would have rejected."""
    started = time.perf_counter()
    if not ast.modules:
        raise UnsupportedConstructError("no module to extract")
    dfg = _Builder(ast.modules[0]).build()
    dfg.meta.extraction_seconds = time.perf_counter() - started
    dfg.validate()
    return dfg
