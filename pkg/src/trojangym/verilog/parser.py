"""Recursive-descent parser with error recovery for the Verilog subset.

Parsing is total: malformed input yields diagnostics, never exceptions.
On a grammar error the parser records a diagnostic and resynchronizes at
the next ``;``, ``end`` or ``endmodule`` so one pass can report several
independent problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import nodes as n
from .diagnostics import (
    Diagnostic,
    E_PARSE,
    E_REDECLARED,
    E_UNBALANCED,
    E_UNDECLARED,
    E_UNSUPPORTED,
    Severity,
)
from .lexer import code_tokens, tokenize
from .tokens import Token, TokenKind

MAX_EXPR_DEPTH = 40
MAX_STMT_DEPTH = 48
MAX_ERRORS = 100

_UNSUPPORTED_ITEM_KEYWORDS = {
    "for": None,
    "while": None,
    "repeat": None,
    "forever": None,
    "generate": "endgenerate",
    "function": "endfunction",
    "task": "endtask",
    "genvar": None,
}

_BINARY_LEVELS = [
    {TokenKind.PIPEPIPE: "||"},
    {TokenKind.AMPAMP: "&&"},
    {TokenKind.PIPE: "|"},
    {TokenKind.CARET: "^", TokenKind.TILDECARET: "~^"},
    {TokenKind.AMP: "&"},
    {TokenKind.EQEQ: "==", TokenKind.NEQ: "!=",
     TokenKind.CASEEQ: "===", TokenKind.CASENEQ: "!=="},
    {TokenKind.LT: "<", TokenKind.LE: "<=", TokenKind.GT: ">", TokenKind.GE: ">="},
    {TokenKind.SHL: "<<", TokenKind.SHR: ">>", TokenKind.ASHR: ">>>"},
    {TokenKind.PLUS: "+", TokenKind.MINUS: "-"},
    {TokenKind.STAR: "*", TokenKind.SLASH: "/", TokenKind.PERCENT: "%"},
]

_UNARY_OPS = {
    TokenKind.TILDE: "~",
    TokenKind.BANG: "!",
    TokenKind.MINUS: "-",
    TokenKind.PLUS: "+",
    TokenKind.AMP: "&",
    TokenKind.PIPE: "|",
    TokenKind.CARET: "^",
    TokenKind.TILDEAMP: "~&",
    TokenKind.TILDEPIPE: "~|",
    TokenKind.TILDECARET: "~^",
}


@dataclass
class ParseResult:
    ast: Optional[n.Ast]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.ast is not None


class _TooManyErrors(Exception):
    pass


def parse_number(tok: Token) -> n.Number:
    text = tok.lexeme.replace("_", "").lower()
    if "'" not in text:
        return n.Number(width=None, base=None, digits=text, value=int(text),
                        line=tok.line, col=tok.column)
    size_part, rest = text.split("'", 1)
    width = int(size_part) if size_part else None
    signed = rest.startswith("s")
    if signed:
        rest = rest[1:]
    base, digits = rest[0], rest[1:]
    radix = {"b": 2, "o": 8, "d": 10, "h": 16}[base]
    value = int(digits.replace("x", "0").replace("z", "0").replace("?", "0"), radix)
    return n.Number(width=width, base=base, digits=digits, value=value,
                    signed=signed, line=tok.line, col=tok.column)


class Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = code_tokens(tokens)
        self.pos = 0
        self.diags: List[Diagnostic] = []
        self._eof = Token(TokenKind.EOF, "", self._last_line(), 1)

    def _last_line(self) -> int:
        for t in reversed(self.tokens):
            return t.line
        return 1

    # --- token plumbing ---

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else self._eof

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def advance(self) -> Token:
        tok = self.peek()
        if not self.at_end():
            self.pos += 1
        return tok

    def at(self, kind: TokenKind) -> bool:
        return self.peek().kind is kind

    def at_kw(self, word: str) -> bool:
        return self.peek().is_keyword(word)

    def accept(self, kind: TokenKind) -> Optional[Token]:
        if self.at(kind):
            return self.advance()
        return None

    def accept_kw(self, word: str) -> Optional[Token]:
        if self.at_kw(word):
            return self.advance()
        return None

    def error(self, message: str, tok: Optional[Token] = None,
              code: str = E_PARSE) -> None:
        tok = tok or self.peek()
        self.diags.append(Diagnostic(Severity.ERROR, code, tok.line, tok.column, message))
        if sum(1 for d in self.diags if d.severity is Severity.ERROR) >= MAX_ERRORS:
            raise _TooManyErrors()

    def expect(self, kind: TokenKind, what: str) -> Optional[Token]:
        tok = self.accept(kind)
        if tok is None:
            got = self.peek().lexeme or "end of file"
            self.error(f"expected {what}, found {got!r}")
        return tok

    def expect_kw(self, word: str, code: str = E_PARSE) -> Optional[Token]:
        tok = self.accept_kw(word)
        if tok is None:
            got = self.peek().lexeme or "end of file"
            self.error(f"expected '{word}', found {got!r}", code=code)
        return tok

    def sync(self, *stop_words: str) -> None:
        """Skip tokens until just past a ';' or to one of the stop keywords."""
        while not self.at_end():
            tok = self.peek()
            if tok.kind is TokenKind.SEMI:
                self.advance()
                return
            if tok.kind is TokenKind.KEYWORD and tok.lexeme in stop_words:
                return
            self.advance()

    # --- entry point ---

    def parse(self) -> List[n.ModuleDecl]:
        modules: List[n.ModuleDecl] = []
        try:
            while not self.at_end():
                if self.at_kw("module"):
                    modules.append(self.parse_module())
                else:
                    self.error(f"expected 'module', found {self.peek().lexeme!r}")
                    self.sync("module")
        except _TooManyErrors:
            self.diags.append(Diagnostic(
                Severity.ERROR, E_PARSE, self.peek().line, self.peek().column,
                f"too many errors ({MAX_ERRORS}); giving up"))
        return modules

    # --- modules ---

    def parse_module(self) -> n.ModuleDecl:
        kw = self.advance()  # 'module'
        mod = n.ModuleDecl(line=kw.line, col=kw.column)
        name = self.expect(TokenKind.IDENT, "module name")
        mod.name = name.lexeme if name else "<anonymous>"

        if self.at(TokenKind.HASH):
            self.advance()
            self.parse_param_header(mod)

        header_names: List[Token] = []
        if self.at(TokenKind.LPAREN):
            self.advance()
            header_names = self.parse_port_header(mod)
        self.expect(TokenKind.SEMI, "';' after module header")

        while not self.at_end() and not self.at_kw("endmodule"):
            before = self.pos
            self.parse_item(mod)
            if self.pos == before:
                self.advance()  # guarantee progress

        if self.accept_kw("endmodule") is None:
            self.error(f"missing 'endmodule' for module '{mod.name}'",
                       tok=kw, code=E_UNBALANCED)

        self._resolve_header_ports(mod, header_names)
        return mod

    def parse_param_header(self, mod: n.ModuleDecl) -> None:
        if not self.expect(TokenKind.LPAREN, "'(' after '#'"):
            return
        while True:
            self.accept_kw("parameter")
            rng = self.parse_range_opt()
            name = self.expect(TokenKind.IDENT, "parameter name")
            if name is None:
                self.sync("endmodule")
                return
            self.expect(TokenKind.EQ, "'=' in parameter assignment")
            value = self.parse_expr()
            mod.params.append(n.ParamDecl(kind="parameter", name=name.lexeme,
                                          value=value, range=rng,
                                          line=name.line, col=name.column))
            if not self.accept(TokenKind.COMMA):
                break
        self.expect(TokenKind.RPAREN, "')' closing parameter list")

    def parse_port_header(self, mod: n.ModuleDecl) -> List[Token]:
        """ANSI ports go straight onto mod.ports; plain names are returned
        for pairing with body declarations."""
        plain: List[Token] = []
        if self.accept(TokenKind.RPAREN):
            return plain
        direction = None
        is_reg = False
        signed = False
        rng: Optional[n.Range] = None
        while True:
            tok = self.peek()
            if tok.kind is TokenKind.KEYWORD and tok.lexeme in ("input", "output", "inout"):
                direction = self.advance().lexeme
                is_reg = False
                signed = False
                rng = None
                if self.accept_kw("wire"):
                    pass
                elif self.accept_kw("reg"):
                    is_reg = True
                if self.accept_kw("signed"):
                    signed = True
                rng = self.parse_range_opt()
                tok = self.peek()
            name = self.expect(TokenKind.IDENT, "port name")
            if name is None:
                self.sync("endmodule")
                return plain
            if direction is None:
                plain.append(name)
            else:
                mod.ports.append(n.Port(name=name.lexeme, direction=direction,
                                        range=rng, is_reg=is_reg, signed=signed,
                                        line=name.line, col=name.column))
            if self.accept(TokenKind.COMMA):
                continue
            break
        self.expect(TokenKind.RPAREN, "')' closing port list")
        return plain

    def _resolve_header_ports(self, mod: n.ModuleDecl, header_names: List[Token]) -> None:
        """Fold non-ANSI body declarations into the port list."""
        if not header_names:
            return
        if mod.ports:
            self.error("cannot mix ANSI and non-ANSI port declarations",
                       tok=header_names[0])
        pending = {t.lexeme: t for t in header_names}
        ports = {t.lexeme: n.Port(name=t.lexeme, direction="", line=t.line, col=t.column)
                 for t in header_names}

        remaining: List[object] = []
        for item in mod.items:
            if isinstance(item, n.NetDecl) and item.array is None:
                hit = [nm for nm in item.names if nm in ports]
                if hit:
                    for nm in hit:
                        p = ports[nm]
                        if item.kind == "reg":
                            p.is_reg = True
                        if item.range is not None and p.range is None:
                            p.range = item.range
                        p.signed = p.signed or item.signed
                    keep = [nm for nm in item.names if nm not in ports]
                    if keep:
                        remaining.append(n.NetDecl(kind=item.kind, names=keep,
                                                   range=item.range, signed=item.signed,
                                                   line=item.line, col=item.col))
                    continue
            if isinstance(item, _DirectionDecl):
                for nm_tok in item.names:
                    nm = nm_tok.lexeme
                    p = ports.get(nm)
                    if p is None:
                        self.diags.append(Diagnostic(
                            Severity.ERROR, E_PARSE, nm_tok.line, nm_tok.column,
                            f"'{nm}' declared {item.direction} but is not a port"))
                        continue
                    if p.direction:
                        self.diags.append(Diagnostic(
                            Severity.ERROR, E_REDECLARED, nm_tok.line, nm_tok.column,
                            f"port '{nm}' direction declared twice"))
                    p.direction = item.direction
                    p.is_reg = p.is_reg or item.is_reg
                    p.signed = p.signed or item.signed
                    if item.range is not None:
                        p.range = item.range
                    pending.pop(nm, None)
                continue
            remaining.append(item)
        mod.items = remaining
        mod.ports = [ports[t.lexeme] for t in header_names]
        for nm, tok in pending.items():
            self.diags.append(Diagnostic(
                Severity.ERROR, E_PARSE, tok.line, tok.column,
                f"port '{nm}' has no direction declaration"))

    # --- module items ---

    def parse_item(self, mod: n.ModuleDecl) -> None:
        tok = self.peek()
        if tok.kind is TokenKind.SEMI:
            self.advance()
            return
        if tok.kind is TokenKind.KEYWORD:
            word = tok.lexeme
            if word in ("input", "output", "inout"):
                self.parse_direction_decl(mod)
                return
            if word in ("wire", "reg", "integer"):
                self.parse_net_decl(mod)
                return
            if word in ("parameter", "localparam"):
                self.parse_param_item(mod)
                return
            if word == "assign":
                self.parse_cont_assign(mod)
                return
            if word in ("always", "initial"):
                mod.items.append(self.parse_proc_block())
                return
            if word in _UNSUPPORTED_ITEM_KEYWORDS:
                mod.items.append(self.parse_unsupported())
                return
            self.error(f"unexpected keyword {word!r} at module level")
            self.sync("endmodule")
            return
        if tok.kind is TokenKind.IDENT:
            self.parse_instance(mod)
            return
        self.error(f"unexpected {tok.lexeme!r} at module level")
        self.sync("endmodule")

    def parse_range_opt(self) -> Optional[n.Range]:
        if not self.at(TokenKind.LBRACKET):
            return None
        lb = self.advance()
        msb = self.parse_expr()
        self.expect(TokenKind.COLON, "':' in range")
        lsb = self.parse_expr()
        self.expect(TokenKind.RBRACKET, "']' closing range")
        return n.Range(msb=msb, lsb=lsb, line=lb.line, col=lb.column)

    def parse_direction_decl(self, mod: n.ModuleDecl) -> None:
        kw = self.advance()
        is_reg = False
        if self.accept_kw("wire"):
            pass
        elif self.accept_kw("reg"):
            is_reg = True
        signed = bool(self.accept_kw("signed"))
        rng = self.parse_range_opt()
        names: List[Token] = []
        while True:
            name = self.expect(TokenKind.IDENT, "port name")
            if name is None:
                self.sync("endmodule")
                return
            names.append(name)
            if not self.accept(TokenKind.COMMA):
                break
        self.expect(TokenKind.SEMI, "';' after declaration")
        mod.items.append(_DirectionDecl(direction=kw.lexeme, is_reg=is_reg,
                                        signed=signed, range=rng, names=names,
                                        line=kw.line, col=kw.column))

    def parse_net_decl(self, mod: n.ModuleDecl) -> None:
        kw = self.advance()
        kind = kw.lexeme
        signed = bool(self.accept_kw("signed")) or kind == "integer"
        rng = self.parse_range_opt() if kind != "integer" else None
        names: List[str] = []
        array: Optional[n.Range] = None
        init_assigns: List[Tuple[str, object, Token]] = []
        while True:
            name = self.expect(TokenKind.IDENT, f"{kind} name")
            if name is None:
                self.sync("endmodule")
                return
            names.append(name.lexeme)
            arr = self.parse_range_opt()
            if arr is not None:
                array = arr
            if self.at(TokenKind.EQ):
                self.advance()
                init_assigns.append((name.lexeme, self.parse_expr(), name))
            if not self.accept(TokenKind.COMMA):
                break
        self.expect(TokenKind.SEMI, "';' after declaration")
        mod.items.append(n.NetDecl(kind=kind, names=names, range=rng, array=array,
                                   signed=signed, line=kw.line, col=kw.column))
        for nm, expr, tok in init_assigns:
            if kind == "wire":
                mod.items.append(n.ContAssign(
                    target=n.Ident(name=nm, line=tok.line, col=tok.column),
                    value=expr, line=tok.line, col=tok.column))
            else:
                self.error("initializer on reg declaration is not supported",
                           tok=tok, code=E_UNSUPPORTED)

    def parse_param_item(self, mod: n.ModuleDecl) -> None:
        kw = self.advance()
        rng = self.parse_range_opt()
        while True:
            name = self.expect(TokenKind.IDENT, "parameter name")
            if name is None:
                self.sync("endmodule")
                return
            self.expect(TokenKind.EQ, "'=' in parameter assignment")
            value = self.parse_expr()
            mod.items.append(n.ParamDecl(kind=kw.lexeme, name=name.lexeme,
                                         value=value, range=rng,
                                         line=name.line, col=name.column))
            if not self.accept(TokenKind.COMMA):
                break
        self.expect(TokenKind.SEMI, "';' after parameter declaration")

    def parse_cont_assign(self, mod: n.ModuleDecl) -> None:
        kw = self.advance()
        while True:
            target = self.parse_lvalue()
            self.expect(TokenKind.EQ, "'=' in continuous assignment")
            value = self.parse_expr()
            mod.items.append(n.ContAssign(target=target, value=value,
                                          line=kw.line, col=kw.column))
            if not self.accept(TokenKind.COMMA):
                break
        self.expect(TokenKind.SEMI, "';' after assignment")

    def parse_proc_block(self) -> n.ProcBlock:
        kw = self.advance()
        sens: Optional[List[n.SensItem]] = None
        if kw.lexeme == "always":
            sens = []
            if self.accept(TokenKind.AT):
                if self.accept(TokenKind.STAR):
                    pass
                elif self.expect(TokenKind.LPAREN, "'(' after '@'"):
                    if self.accept(TokenKind.STAR):
                        self.expect(TokenKind.RPAREN, "')' after '*'")
                    else:
                        while True:
                            edge = None
                            if self.accept_kw("posedge"):
                                edge = "posedge"
                            elif self.accept_kw("negedge"):
                                edge = "negedge"
                            sig = self.parse_expr()
                            sens.append(n.SensItem(edge=edge, signal=sig))
                            if self.accept_kw("or") or self.accept(TokenKind.COMMA):
                                continue
                            break
                        self.expect(TokenKind.RPAREN, "')' closing sensitivity list")
        body = self.parse_stmt(0)
        return n.ProcBlock(kind=kw.lexeme, sensitivity=sens, body=body,
                           line=kw.line, col=kw.column)

    def parse_instance(self, mod: n.ModuleDecl) -> None:
        mtok = self.advance()
        inst = n.Instance(module_name=mtok.lexeme, line=mtok.line, col=mtok.column)
        if self.accept(TokenKind.HASH):
            if self.expect(TokenKind.LPAREN, "'(' after '#'"):
                inst.param_overrides = self.parse_conn_list()
                self.expect(TokenKind.RPAREN, "')' closing parameter overrides")
        name = self.expect(TokenKind.IDENT, "instance name")
        if name is None:
            self.sync("endmodule")
            return
        inst.instance_name = name.lexeme
        if self.expect(TokenKind.LPAREN, "'(' opening port connections"):
            if not self.at(TokenKind.RPAREN):
                inst.ports = self.parse_conn_list()
            self.expect(TokenKind.RPAREN, "')' closing port connections")
        self.expect(TokenKind.SEMI, "';' after instantiation")
        mod.items.append(inst)

    def parse_conn_list(self) -> List[n.PortConn]:
        conns: List[n.PortConn] = []
        while True:
            tok = self.peek()
            if tok.kind is TokenKind.DOT:
                self.advance()
                pname = self.expect(TokenKind.IDENT, "port name after '.'")
                self.expect(TokenKind.LPAREN, "'(' in named connection")
                expr = None
                if not self.at(TokenKind.RPAREN):
                    expr = self.parse_expr()
                self.expect(TokenKind.RPAREN, "')' closing connection")
                conns.append(n.PortConn(port=pname.lexeme if pname else "?",
                                        expr=expr, line=tok.line, col=tok.column))
            else:
                conns.append(n.PortConn(port=None, expr=self.parse_expr(),
                                        line=tok.line, col=tok.column))
            if not self.accept(TokenKind.COMMA):
                return conns

    def parse_unsupported(self) -> n.UnsupportedItem:
        """Capture a construct outside the subset as normalized token text."""
        kw = self.advance()
        closer = _UNSUPPORTED_ITEM_KEYWORDS.get(kw.lexeme)
        parts = [kw.lexeme]
        depth = 0
        while not self.at_end():
            tok = self.peek()
            if closer is not None:
                parts.append(self.advance().lexeme)
                if tok.is_keyword(closer):
                    break
                continue
            # statement-shaped: swallow through balanced begin/end, stop at ';'
            if tok.is_keyword("begin"):
                depth += 1
            elif tok.is_keyword("end"):
                if depth == 0:
                    break
                depth -= 1
                parts.append(self.advance().lexeme)
                if depth == 0:
                    break
                continue
            elif tok.is_keyword("endmodule"):
                break
            parts.append(self.advance().lexeme)
            if tok.kind is TokenKind.SEMI and depth == 0:
                break
        return n.UnsupportedItem(keyword=kw.lexeme, text=" ".join(parts),
                                 line=kw.line, col=kw.column)

    # --- statements ---

    def parse_stmt(self, depth: int):
        if depth > MAX_STMT_DEPTH:
            self.error("statements nested too deeply")
            self.sync("end", "endmodule")
            return n.NullStmt(line=self.peek().line, col=self.peek().column)
        tok = self.peek()
        if tok.kind is TokenKind.SEMI:
            self.advance()
            return n.NullStmt(line=tok.line, col=tok.column)
        if tok.is_keyword("begin"):
            return self.parse_block(depth)
        if tok.is_keyword("if"):
            return self.parse_if(depth)
        if tok.lexeme in ("case", "casex", "casez") and tok.kind is TokenKind.KEYWORD:
            return self.parse_case(depth)
        if tok.kind is TokenKind.KEYWORD and tok.lexeme in _UNSUPPORTED_ITEM_KEYWORDS:
            item = self.parse_unsupported()
            self.error(f"'{item.keyword}' statement is outside the supported subset",
                       tok=tok, code=E_UNSUPPORTED)
            return n.NullStmt(line=tok.line, col=tok.column)
        if tok.kind is TokenKind.HASH:
            self.error("delay control is outside the supported subset",
                       tok=tok, code=E_UNSUPPORTED)
            self.advance()
            self.accept(TokenKind.NUMBER)
            return self.parse_stmt(depth + 1)
        if tok.kind is TokenKind.SYSNAME:
            self.advance()
            args: List[object] = []
            if self.accept(TokenKind.LPAREN):
                if not self.at(TokenKind.RPAREN):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(TokenKind.COMMA):
                            break
                self.expect(TokenKind.RPAREN, "')' closing task arguments")
            self.expect(TokenKind.SEMI, "';' after system task")
            return n.SysTask(name=tok.lexeme, args=args, line=tok.line, col=tok.column)
        if tok.kind in (TokenKind.IDENT, TokenKind.LBRACE):
            target = self.parse_lvalue()
            blocking = True
            if self.accept(TokenKind.LE):
                blocking = False
            elif not self.expect(TokenKind.EQ, "'=' or '<=' in assignment"):
                self.sync("end", "endmodule")
                return n.NullStmt(line=tok.line, col=tok.column)
            value = self.parse_expr()
            self.expect(TokenKind.SEMI, "';' after assignment")
            return n.Assign(target=target, value=value, blocking=blocking,
                            line=tok.line, col=tok.column)
        self.error(f"expected statement, found {tok.lexeme or 'end of file'!r}")
        self.sync("end", "endmodule")
        return n.NullStmt(line=tok.line, col=tok.column)

    def parse_block(self, depth: int) -> n.Block:
        kw = self.advance()  # 'begin'
        if self.accept(TokenKind.COLON):
            self.accept(TokenKind.IDENT)  # block label, not retained
        block = n.Block(line=kw.line, col=kw.column)
        while True:
            if self.accept_kw("end"):
                return block
            if self.at_end() or self.at_kw("endmodule"):
                self.error("'begin' without matching 'end'", tok=kw, code=E_UNBALANCED)
                return block
            before = self.pos
            block.stmts.append(self.parse_stmt(depth + 1))
            if self.pos == before:
                self.advance()

    def parse_if(self, depth: int) -> n.IfStmt:
        kw = self.advance()
        self.expect(TokenKind.LPAREN, "'(' after 'if'")
        cond = self.parse_expr()
        self.expect(TokenKind.RPAREN, "')' closing condition")
        then = self.parse_stmt(depth + 1)
        other = None
        if self.accept_kw("else"):
            other = self.parse_stmt(depth + 1)
        return n.IfStmt(cond=cond, then=then, other=other, line=kw.line, col=kw.column)

    def parse_case(self, depth: int) -> n.CaseStmt:
        kw = self.advance()
        stmt = n.CaseStmt(kind=kw.lexeme, line=kw.line, col=kw.column)
        self.expect(TokenKind.LPAREN, f"'(' after '{kw.lexeme}'")
        stmt.subject = self.parse_expr()
        self.expect(TokenKind.RPAREN, "')' closing case subject")
        while True:
            if self.accept_kw("endcase"):
                return stmt
            if self.at_end() or self.at_kw("endmodule"):
                self.error(f"'{kw.lexeme}' without matching 'endcase'",
                           tok=kw, code=E_UNBALANCED)
                return stmt
            tok = self.peek()
            if self.accept_kw("default"):
                self.accept(TokenKind.COLON)
                body = self.parse_stmt(depth + 1)
                stmt.items.append(n.CaseItem(labels=None, body=body,
                                             line=tok.line, col=tok.column))
                continue
            labels = [self.parse_expr()]
            while self.accept(TokenKind.COMMA):
                labels.append(self.parse_expr())
            self.expect(TokenKind.COLON, "':' after case label")
            body = self.parse_stmt(depth + 1)
            stmt.items.append(n.CaseItem(labels=labels, body=body,
                                         line=tok.line, col=tok.column))

    # --- expressions ---

    def parse_lvalue(self):
        tok = self.peek()
        if tok.kind is TokenKind.LBRACE:
            return self.parse_primary(0)
        name = self.expect(TokenKind.IDENT, "assignment target")
        if name is None:
            return n.Ident(name="<error>", line=tok.line, col=tok.column)
        return self.parse_select_suffix(
            n.Ident(name=name.lexeme, line=name.line, col=name.column), 0)

    def parse_expr(self, depth: int = 0):
        if depth > MAX_EXPR_DEPTH:
            self.error("expression nested too deeply")
            self.sync("end", "endmodule")
            return n.Number(digits="0", value=0,
                            line=self.peek().line, col=self.peek().column)
        return self.parse_ternary(depth)

    def parse_ternary(self, depth: int):
        cond = self.parse_binary(0, depth)
        if self.at(TokenKind.QUESTION):
            qtok = self.advance()
            then = self.parse_expr(depth + 1)
            self.expect(TokenKind.COLON, "':' in conditional expression")
            other = self.parse_expr(depth + 1)
            return n.Ternary(cond=cond, then=then, other=other,
                             line=qtok.line, col=qtok.column)
        return cond

    def parse_binary(self, level: int, depth: int):
        if level >= len(_BINARY_LEVELS):
            return self.parse_unary(depth)
        ops = _BINARY_LEVELS[level]
        lhs = self.parse_binary(level + 1, depth)
        while self.peek().kind in ops:
            tok = self.advance()
            rhs = self.parse_binary(level + 1, depth)
            lhs = n.Binary(op=ops[tok.kind], lhs=lhs, rhs=rhs,
                           line=tok.line, col=tok.column)
        return lhs

    def parse_unary(self, depth: int):
        tok = self.peek()
        if tok.kind in _UNARY_OPS:
            self.advance()
            operand = self.parse_unary(depth)
            return n.Unary(op=_UNARY_OPS[tok.kind], operand=operand,
                           line=tok.line, col=tok.column)
        return self.parse_primary(depth)

    def parse_primary(self, depth: int):
        tok = self.peek()
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return parse_number(tok)
        if tok.kind is TokenKind.STRING:
            self.advance()
            return n.StringLit(text=tok.lexeme, line=tok.line, col=tok.column)
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            inner = self.parse_expr(depth + 1)
            self.expect(TokenKind.RPAREN, "')' closing expression")
            return self.parse_select_suffix(inner, depth)
        if tok.kind is TokenKind.LBRACE:
            return self.parse_concat(depth)
        if tok.kind is TokenKind.SYSNAME:
            self.advance()
            args: List[object] = []
            if self.accept(TokenKind.LPAREN):
                if not self.at(TokenKind.RPAREN):
                    while True:
                        args.append(self.parse_expr(depth + 1))
                        if not self.accept(TokenKind.COMMA):
                            break
                self.expect(TokenKind.RPAREN, "')' closing call")
            return n.Call(name=tok.lexeme, args=args, line=tok.line, col=tok.column)
        if tok.kind is TokenKind.IDENT:
            self.advance()
            if self.at(TokenKind.LPAREN):
                self.advance()
                args = []
                if not self.at(TokenKind.RPAREN):
                    while True:
                        args.append(self.parse_expr(depth + 1))
                        if not self.accept(TokenKind.COMMA):
                            break
                self.expect(TokenKind.RPAREN, "')' closing call")
                return n.Call(name=tok.lexeme, args=args, line=tok.line, col=tok.column)
            return self.parse_select_suffix(
                n.Ident(name=tok.lexeme, line=tok.line, col=tok.column), depth)
        self.error(f"expected expression, found {tok.lexeme or 'end of file'!r}")
        self.advance()
        return n.Number(digits="0", value=0, line=tok.line, col=tok.column)

    def parse_select_suffix(self, base, depth: int):
        while self.at(TokenKind.LBRACKET):
            lb = self.advance()
            first = self.parse_expr(depth + 1)
            if self.at(TokenKind.COLON) or self.at(TokenKind.PLUSCOLON) \
                    or self.at(TokenKind.MINUSCOLON):
                mode = self.advance().lexeme
                second = self.parse_expr(depth + 1)
                self.expect(TokenKind.RBRACKET, "']' closing part-select")
                base = n.PartSelect(base=base, left=first, right=second, mode=mode,
                                    line=lb.line, col=lb.column)
            else:
                self.expect(TokenKind.RBRACKET, "']' closing bit-select")
                base = n.BitSelect(base=base, index=first, line=lb.line, col=lb.column)
        return base

    def parse_concat(self, depth: int):
        lb = self.advance()  # '{'
        first = self.parse_expr(depth + 1)
        if self.at(TokenKind.LBRACE):
            value = self.parse_concat(depth + 1)
            self.expect(TokenKind.RBRACE, "'}' closing replication")
            return n.Repl(count=first, value=value, line=lb.line, col=lb.column)
        parts = [first]
        while self.accept(TokenKind.COMMA):
            parts.append(self.parse_expr(depth + 1))
        self.expect(TokenKind.RBRACE, "'}' closing concatenation")
        node = n.Concat(parts=parts, line=lb.line, col=lb.column)
        return self.parse_select_suffix(node, depth)


@dataclass
class _DirectionDecl(n.Node):
    """Transient non-ANSI item; folded into ports before the parser returns."""

    direction: str = ""
    is_reg: bool = False
    signed: bool = False
    range: Optional[n.Range] = None
    names: List[Token] = field(default_factory=list)


def parse(tokens: List[Token], lex_diags: Optional[List[Diagnostic]] = None) -> ParseResult:
    """Parse a token stream; grammar-clean input is also name-resolved."""
    parser = Parser(tokens)
    modules = parser.parse()
    diags = list(lex_diags or []) + parser.diags
    if any(d.severity is Severity.ERROR for d in diags):
        return ParseResult(ast=None, diagnostics=diags)
    ast = n.Ast(modules=modules)
    diags += resolve_names(ast)
    if any(d.severity is Severity.ERROR for d in diags):
        return ParseResult(ast=None, diagnostics=diags)
    return ParseResult(ast=ast, diagnostics=diags)


def parse_source(source: str) -> ParseResult:
    tokens, lex_diags = tokenize(source)
    return parse(tokens, lex_diags)


# --- name resolution --------------------------------------------------------

def module_scope(mod: n.ModuleDecl) -> dict:
    """Name -> declaring node for ports, nets, regs and parameters."""
    scope: dict = {}
    for p in mod.ports:
        scope[p.name] = p
    for prm in mod.params:
        scope[prm.name] = prm
    for item in mod.items:
        if isinstance(item, n.NetDecl):
            for nm in item.names:
                scope[nm] = item
        elif isinstance(item, n.ParamDecl):
            scope[item.name] = item
    return scope


def resolve_names(ast: n.Ast) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    for mod in ast.modules:
        scope = module_scope(mod)
        seen: dict = {}
        for p in mod.ports:
            seen[p.name] = p
        for item in mod.items:
            if isinstance(item, n.NetDecl):
                for nm in item.names:
                    if nm in seen:
                        diags.append(Diagnostic(
                            Severity.ERROR, E_REDECLARED, item.line, item.col,
                            f"'{nm}' is declared more than once"))
                    seen[nm] = item
            elif isinstance(item, n.ParamDecl):
                if item.name in seen:
                    diags.append(Diagnostic(
                        Severity.ERROR, E_REDECLARED, item.line, item.col,
                        f"'{item.name}' is declared more than once"))
                seen[item.name] = item

        def check_expr(expr) -> None:
            for ident in iter_idents(expr):
                if ident.name not in scope:
                    diags.append(Diagnostic(
                        Severity.ERROR, E_UNDECLARED, ident.line, ident.col,
                        f"identifier '{ident.name}' is not declared"))

        for expr in iter_module_exprs(mod):
            check_expr(expr)
    return diags


def iter_idents(expr):
    if isinstance(expr, n.Ident):
        yield expr
    elif isinstance(expr, n.Unary):
        yield from iter_idents(expr.operand)
    elif isinstance(expr, n.Binary):
        yield from iter_idents(expr.lhs)
        yield from iter_idents(expr.rhs)
    elif isinstance(expr, n.Ternary):
        yield from iter_idents(expr.cond)
        yield from iter_idents(expr.then)
        yield from iter_idents(expr.other)
    elif isinstance(expr, n.Concat):
        for p in expr.parts:
            yield from iter_idents(p)
    elif isinstance(expr, n.Repl):
        yield from iter_idents(expr.count)
        yield from iter_idents(expr.value)
    elif isinstance(expr, n.BitSelect):
        yield from iter_idents(expr.base)
        yield from iter_idents(expr.index)
    elif isinstance(expr, n.PartSelect):
        yield from iter_idents(expr.base)
        yield from iter_idents(expr.left)
        yield from iter_idents(expr.right)
    elif isinstance(expr, n.Call):
        for a in expr.args:
            yield from iter_idents(a)


def iter_stmt_exprs(stmt):
    if isinstance(stmt, n.Assign):
        yield stmt.target
        yield stmt.value
    elif isinstance(stmt, n.Block):
        for s in stmt.stmts:
            yield from iter_stmt_exprs(s)
    elif isinstance(stmt, n.IfStmt):
        yield stmt.cond
        yield from iter_stmt_exprs(stmt.then)
        if stmt.other is not None:
            yield from iter_stmt_exprs(stmt.other)
    elif isinstance(stmt, n.CaseStmt):
        yield stmt.subject
        for item in stmt.items:
            for lab in item.labels or []:
                yield lab
            if item.body is not None:
                yield from iter_stmt_exprs(item.body)
    elif isinstance(stmt, n.SysTask):
        for a in stmt.args:
            yield a


def iter_module_exprs(mod: n.ModuleDecl):
    """Every expression in the module, ranges included."""
    def from_range(rng: Optional[n.Range]):
        if rng is not None:
            yield rng.msb
            yield rng.lsb

    for p in mod.ports:
        yield from from_range(p.range)
    for prm in mod.params:
        yield prm.value
        yield from from_range(prm.range)
    for item in mod.items:
        if isinstance(item, n.NetDecl):
            yield from from_range(item.range)
            yield from from_range(item.array)
        elif isinstance(item, n.ParamDecl):
            yield item.value
            yield from from_range(item.range)
        elif isinstance(item, n.ContAssign):
            yield item.target
            yield item.value
        elif isinstance(item, n.ProcBlock):
            for s in item.sensitivity or []:
                yield s.signal
            yield from iter_stmt_exprs(item.body)
        elif isinstance(item, n.Instance):
            for conn in item.param_overrides + item.ports:
                if conn.expr is not None:
                    yield conn.expr
