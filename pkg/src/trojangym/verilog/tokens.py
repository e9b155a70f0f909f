"""Token vocabulary for the synthesizable Verilog-2001 subset."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto


class TokenKind(Enum):
    # literals / names
    NUMBER = auto()         # 42, 8'hff, 4'b1010
    STRING = auto()         # "text" (only legal inside system tasks)
    IDENT = auto()
    SYSNAME = auto()        # $display, $time

    KEYWORD = auto()

    # operators
    PLUS = auto()           # +
    MINUS = auto()          # -
    STAR = auto()           # *
    SLASH = auto()          # /
    PERCENT = auto()        # %
    AMP = auto()            # &
    AMPAMP = auto()         # &&
    PIPE = auto()           # |
    PIPEPIPE = auto()       # ||
    CARET = auto()          # ^
    TILDE = auto()          # ~
    TILDECARET = auto()     # ~^ (also ^~)
    TILDEAMP = auto()       # ~&
    TILDEPIPE = auto()      # ~|
    BANG = auto()           # !
    SHL = auto()            # <<
    SHR = auto()            # >>
    ASHR = auto()           # >>>
    LT = auto()             # <
    LE = auto()             # <=  (also nonblocking assign)
    GT = auto()             # >
    GE = auto()             # >=
    EQEQ = auto()           # ==
    NEQ = auto()            # !=
    CASEEQ = auto()         # ===
    CASENEQ = auto()        # !==
    QUESTION = auto()       # ?
    COLON = auto()          # :
    EQ = auto()             # =
    AT = auto()             # @
    HASH = auto()           # #
    PLUSCOLON = auto()      # +:
    MINUSCOLON = auto()     # -:

    # delimiters
    LPAREN = auto()
    RPAREN = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    LBRACE = auto()
    RBRACE = auto()
    SEMI = auto()
    COMMA = auto()
    DOT = auto()

    # trivia (retained so agent-inserted comments survive)
    COMMENT = auto()

    EOF = auto()


KEYWORDS = frozenset({
    "module", "endmodule", "input", "output", "inout", "wire", "reg",
    "integer", "parameter", "localparam", "assign", "always", "initial",
    "begin", "end", "if", "else", "case", "casex", "casez", "endcase",
    "default", "posedge", "negedge", "or", "signed",
    "for", "generate", "endgenerate", "genvar", "function", "endfunction",
    "task", "endtask", "while", "repeat", "forever",
})

TRIVIA_KINDS = frozenset({TokenKind.COMMENT})


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int

    def is_keyword(self, word: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.lexeme == word

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.lexeme!r}, {self.line}:{self.column})"
