"""Constant folding and structural width inference.

Widths come in three classes:

* ``HARD`` -- fixed structurally: identifiers with declared ranges, sized
  literals, bit/part selects, concatenations and replications of fixed
  parts.
* ``SOFT`` -- self-determined by an operator but context-extended in
  practice (arithmetic/bitwise results, 1-bit comparison/reduction
  results).
* ``FLEX`` -- unsized literals; they take whatever width the context asks.

Assignments where both sides are HARD and unequal are errors; a SOFT
right-hand side only warns, and only when it would truncate; FLEX never
complains.
"""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Set, Tuple

from . import nodes as n

HARD = "hard"
SOFT = "soft"
FLEX = "flex"

_ARITH_OPS = {"+", "-", "*", "/", "%", "&", "|", "^", "~^"}
_SHIFT_OPS = {"<<", ">>", ">>>"}
_BOOL_OPS = {"==", "!=", "===", "!==", "<", "<=", ">", ">=", "&&", "||"}
_REDUCTIONS = {"&", "|", "^", "~&", "~|", "~^", "!"}


def const_int(expr, env: Dict[str, int]) -> Optional[int]:
    """Evaluate a constant expression; None when it is not compile-time known."""
    if isinstance(expr, n.Number):
        return expr.value
    if isinstance(expr, n.Ident):
        return env.get(expr.name)
    if isinstance(expr, n.Unary):
        v = const_int(expr.operand, env)
        if v is None:
            return None
        if expr.op == "-":
            return -v
        if expr.op == "+":
            return v
        return None
    if isinstance(expr, n.Binary):
        lhs = const_int(expr.lhs, env)
        rhs = const_int(expr.rhs, env)
        if lhs is None or rhs is None:
            return None
        try:
            if expr.op == "+":
                return lhs + rhs
            if expr.op == "-":
                return lhs - rhs
            if expr.op == "*":
                return lhs * rhs
            if expr.op == "/":
                return lhs // rhs
            if expr.op == "%":
                return lhs % rhs
            if expr.op == "<<":
                return lhs << rhs
            if expr.op == ">>":
                return lhs >> rhs
        except (ZeroDivisionError, ValueError, OverflowError):
            return None
        return None
    if isinstance(expr, n.Ternary):
        cond = const_int(expr.cond, env)
        if cond is None:
            return None
        return const_int(expr.then if cond else expr.other, env)
    return None


def range_width(rng: Optional[n.Range], env: Dict[str, int]) -> Optional[int]:
    if rng is None:
        return 1
    msb = const_int(rng.msb, env)
    lsb = const_int(rng.lsb, env)
    if msb is None or lsb is None:
        return None
    return abs(msb - lsb) + 1


def param_env(mod: n.ModuleDecl) -> Dict[str, int]:
    """Parameter name -> value, resolving params that reference earlier ones."""
    env: Dict[str, int] = {}
    decls = list(mod.params) + [i for i in mod.items if isinstance(i, n.ParamDecl)]
    for _ in range(len(decls) + 1):
        progressed = False
        for d in decls:
            if d.name in env:
                continue
            v = const_int(d.value, env)
            if v is not None:
                env[d.name] = v
                progressed = True
        if not progressed:
            break
    return env


def declared_widths(mod: n.ModuleDecl, env: Dict[str, int]) -> Dict[str, Optional[int]]:
    """Signal name -> bit width (None when the range is not compile-time known)."""
    widths: Dict[str, Optional[int]] = {}
    for p in mod.ports:
        widths[p.name] = range_width(p.range, env)
    for item in mod.items:
        if isinstance(item, n.NetDecl):
            w = 32 if item.kind == "integer" else range_width(item.range, env)
            for nm in item.names:
                widths[nm] = w
    return widths


def array_names(mod: n.ModuleDecl) -> Set[str]:
    """Names declared with an address range (memories)."""
    names: Set[str] = set()
    for item in mod.items:
        if isinstance(item, n.NetDecl) and item.array is not None:
            names.update(item.names)
    return names


def infer_width(expr, widths: Dict[str, Optional[int]],
                params: Set[str], env: Dict[str, int],
                arrays: Optional[Set[str]] = None) -> Tuple[Optional[int], str]:
    """Return (bit width, class) for an expression; width None means unknown."""
    arrays = arrays or set()
    if isinstance(expr, n.Number):
        if expr.width is not None:
            return expr.width, HARD
        return 32, FLEX
    if isinstance(expr, n.Ident):
        if expr.name in params:
            return 32, FLEX
        return widths.get(expr.name), HARD
    if isinstance(expr, n.StringLit):
        return None, FLEX
    if isinstance(expr, n.Unary):
        if expr.op in _REDUCTIONS and expr.op != "~":
            return 1, SOFT
        w, k = infer_width(expr.operand, widths, params, env, arrays)
        return w, FLEX if k is FLEX else SOFT
    if isinstance(expr, n.Binary):
        if expr.op in _BOOL_OPS:
            return 1, SOFT
        lw, lk = infer_width(expr.lhs, widths, params, env, arrays)
        rw, rk = infer_width(expr.rhs, widths, params, env, arrays)
        if expr.op in _SHIFT_OPS:
            return lw, lk if lk is not FLEX else FLEX
        if lk is FLEX and rk is FLEX:
            return 32, FLEX
        if lk is FLEX:
            return rw, SOFT
        if rk is FLEX:
            return lw, SOFT
        if lw is None or rw is None:
            return None, SOFT
        return max(lw, rw), SOFT
    if isinstance(expr, n.Ternary):
        tw, tk = infer_width(expr.then, widths, params, env, arrays)
        ow, ok_ = infer_width(expr.other, widths, params, env, arrays)
        if tk is FLEX and ok_ is FLEX:
            return 32, FLEX
        if tk is FLEX:
            return ow, SOFT
        if ok_ is FLEX:
            return tw, SOFT
        if tw is None or ow is None:
            return None, SOFT
        return max(tw, ow), SOFT
    if isinstance(expr, n.Concat):
        total = 0
        klass = HARD
        for part in expr.parts:
            w, k = infer_width(part, widths, params, env, arrays)
            if w is None:
                return None, HARD
            if k is FLEX:
                klass = SOFT
            total += w
        return total, klass
    if isinstance(expr, n.Repl):
        count = const_int(expr.count, env)
        w, _ = infer_width(expr.value, widths, params, env, arrays)
        if count is None or w is None:
            return None, HARD
        return count * w, HARD
    if isinstance(expr, n.BitSelect):
        if isinstance(expr.base, n.Ident) and expr.base.name in arrays:
            return widths.get(expr.base.name), HARD  # memory element
        return 1, HARD
    if isinstance(expr, n.PartSelect):
        if expr.mode == ":":
            left = const_int(expr.left, env)
            right = const_int(expr.right, env)
            if left is None or right is None:
                return None, HARD
            return abs(left - right) + 1, HARD
        w = const_int(expr.right, env)
        return w, HARD
    if isinstance(expr, n.Call):
        if expr.name in ("$signed", "$unsigned") and len(expr.args) == 1:
            return infer_width(expr.args[0], widths, params, env, arrays)
        return None, SOFT
    return None, SOFT


def declared_names(mod: n.ModuleDecl) -> Iterable[str]:
    for p in mod.ports:
        yield p.name
    for item in mod.items:
        if isinstance(item, n.NetDecl):
            yield from item.names
