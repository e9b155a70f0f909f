"""AST for the synthesizable Verilog subset.

Source positions ride along for diagnostics but are excluded from equality,
so print -> reparse round-trips compare structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple


@dataclass
class Node:
    line: int = field(default=0, compare=False, repr=False, kw_only=True)
    col: int = field(default=0, compare=False, repr=False, kw_only=True)


# --- expressions -----------------------------------------------------------

@dataclass
class Ident(Node):
    name: str = ""


@dataclass
class Number(Node):
    """Literal normalized to (width, base, digits); ``8'hFF`` -> (8, 'h', 'ff')."""

    width: Optional[int] = None
    base: Optional[str] = None
    digits: str = "0"
    value: int = 0
    signed: bool = False

    def canonical(self) -> str:
        if self.base is None:
            return self.digits
        size = str(self.width) if self.width is not None else ""
        sign = "s" if self.signed else ""
        return f"{size}'{sign}{self.base}{self.digits}"


@dataclass
class StringLit(Node):
    text: str = ""


@dataclass
class Unary(Node):
    op: str = ""
    operand: "Expr" = None


@dataclass
class Binary(Node):
    op: str = ""
    lhs: "Expr" = None
    rhs: "Expr" = None


@dataclass
class Ternary(Node):
    cond: "Expr" = None
    then: "Expr" = None
    other: "Expr" = None


@dataclass
class Concat(Node):
    parts: List["Expr"] = field(default_factory=list)


@dataclass
class Repl(Node):
    count: "Expr" = None
    value: "Expr" = None


@dataclass
class BitSelect(Node):
    base: "Expr" = None
    index: "Expr" = None


@dataclass
class PartSelect(Node):
    base: "Expr" = None
    left: "Expr" = None
    right: "Expr" = None
    mode: str = ":"  # ":", "+:", "-:"


@dataclass
class Call(Node):
    """Function or system call; flagged later, kept for faithful reprint."""

    name: str = ""
    args: List["Expr"] = field(default_factory=list)


Expr = object  # union of the expression dataclasses above


# --- statements ------------------------------------------------------------

@dataclass
class Assign(Node):
    target: Expr = None
    value: Expr = None
    blocking: bool = True


@dataclass
class Block(Node):
    stmts: List["Stmt"] = field(default_factory=list)


@dataclass
class IfStmt(Node):
    cond: Expr = None
    then: "Stmt" = None
    other: Optional["Stmt"] = None


@dataclass
class CaseItem(Node):
    labels: Optional[List[Expr]] = None  # None = default
    body: Optional["Stmt"] = None


@dataclass
class CaseStmt(Node):
    kind: str = "case"  # case / casex / casez
    subject: Expr = None
    items: List[CaseItem] = field(default_factory=list)


@dataclass
class SysTask(Node):
    name: str = ""
    args: List[Expr] = field(default_factory=list)


@dataclass
class NullStmt(Node):
    pass


Stmt = object


# --- module items ----------------------------------------------------------

@dataclass
class Range(Node):
    """Packed ``[msb:lsb]`` bounds as constant expressions."""

    msb: Expr = None
    lsb: Expr = None


@dataclass
class Port(Node):
    name: str = ""
    direction: str = "input"  # input / output / inout
    range: Optional[Range] = None
    is_reg: bool = False
    signed: bool = False


@dataclass
class NetDecl(Node):
    kind: str = "wire"  # wire / reg / integer
    names: List[str] = field(default_factory=list)
    range: Optional[Range] = None
    array: Optional[Range] = None  # unpacked dimension (memories)
    signed: bool = False


@dataclass
class ParamDecl(Node):
    kind: str = "parameter"  # parameter / localparam
    name: str = ""
    value: Expr = None
    range: Optional[Range] = None


@dataclass
class ContAssign(Node):
    target: Expr = None
    value: Expr = None


@dataclass
class SensItem(Node):
    edge: Optional[str] = None  # posedge / negedge / None (level)
    signal: Expr = None


@dataclass
class ProcBlock(Node):
    kind: str = "always"  # always / initial
    sensitivity: Optional[List[SensItem]] = None  # None for initial, [] for @(*)
    body: Stmt = None


@dataclass
class PortConn(Node):
    port: Optional[str] = None  # None for positional
    expr: Optional[Expr] = None  # None for unconnected .p()


@dataclass
class Instance(Node):
    module_name: str = ""
    instance_name: str = ""
    param_overrides: List[PortConn] = field(default_factory=list)
    ports: List[PortConn] = field(default_factory=list)


@dataclass
class UnsupportedItem(Node):
    """Construct outside the subset, kept as normalized token text."""

    keyword: str = ""
    text: str = ""


Item = object


@dataclass
class ModuleDecl(Node):
    name: str = ""
    params: List[ParamDecl] = field(default_factory=list)
    ports: List[Port] = field(default_factory=list)
    items: List[Item] = field(default_factory=list)

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None


@dataclass
class Ast(Node):
    modules: List[ModuleDecl] = field(default_factory=list)


def port_signature(mod: ModuleDecl) -> Tuple[Tuple[str, str, Optional[Tuple[int, int]]], ...]:
    """Interface fingerprint used by the baseline-preservation gate."""
    from .widths import const_int  # local import to avoid a cycle

    sig = []
    for p in mod.ports:
        bounds = None
        if p.range is not None:
            msb = const_int(p.range.msb, {})
            lsb = const_int(p.range.lsb, {})
            bounds = (msb, lsb) if msb is not None and lsb is not None else ("?", "?")
        sig.append((p.name, p.direction, bounds))
    return tuple(sig)
