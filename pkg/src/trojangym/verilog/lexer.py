"""Lexer for the Verilog subset.

Comments are kept as trivia tokens: agent-inserted comments mark Trojan
logic and must survive tokenize round-trips. Lexical problems become
diagnostics, never exceptions.
"""

from __future__ import annotations

from typing import List, Tuple

from .diagnostics import Diagnostic, E_LEX, Severity
from .tokens import KEYWORDS, Token, TokenKind

_PUNCT3 = {
    ">>>": TokenKind.ASHR,
    "===": TokenKind.CASEEQ,
    "!==": TokenKind.CASENEQ,
}

_PUNCT2 = {
    "&&": TokenKind.AMPAMP,
    "||": TokenKind.PIPEPIPE,
    "~^": TokenKind.TILDECARET,
    "^~": TokenKind.TILDECARET,
    "~&": TokenKind.TILDEAMP,
    "~|": TokenKind.TILDEPIPE,
    "<<": TokenKind.SHL,
    ">>": TokenKind.SHR,
    "<=": TokenKind.LE,
    ">=": TokenKind.GE,
    "==": TokenKind.EQEQ,
    "!=": TokenKind.NEQ,
    "+:": TokenKind.PLUSCOLON,
    "-:": TokenKind.MINUSCOLON,
}

_PUNCT1 = {
    "+": TokenKind.PLUS,
    "-": TokenKind.MINUS,
    "*": TokenKind.STAR,
    "/": TokenKind.SLASH,
    "%": TokenKind.PERCENT,
    "&": TokenKind.AMP,
    "|": TokenKind.PIPE,
    "^": TokenKind.CARET,
    "~": TokenKind.TILDE,
    "!": TokenKind.BANG,
    "<": TokenKind.LT,
    ">": TokenKind.GT,
    "?": TokenKind.QUESTION,
    ":": TokenKind.COLON,
    "=": TokenKind.EQ,
    "@": TokenKind.AT,
    "#": TokenKind.HASH,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    ";": TokenKind.SEMI,
    ",": TokenKind.COMMA,
    ".": TokenKind.DOT,
}

_BASE_DIGITS = {
    "b": "01xz?_",
    "o": "01234567xz?_",
    "d": "0123456789_",
    "h": "0123456789abcdefxz?_",
}


def _ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_$"


def tokenize(source: str) -> Tuple[List[Token], List[Diagnostic]]:
    """Scan ``source`` into tokens (trivia included) plus lexical diagnostics."""
    tokens: List[Token] = []
    diags: List[Diagnostic] = []
    i = 0
    n = len(source)
    line = 1
    col = 1

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if i < n and source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n\f\v":
            advance(1)
            continue

        tok_line, tok_col = line, col

        # comments
        if source.startswith("//", i):
            j = source.find("\n", i)
            if j < 0:
                j = n
            tokens.append(Token(TokenKind.COMMENT, source[i:j], tok_line, tok_col))
            advance(j - i)
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                diags.append(Diagnostic(Severity.ERROR, E_LEX, tok_line, tok_col,
                                        "unterminated block comment"))
                tokens.append(Token(TokenKind.COMMENT, source[i:], tok_line, tok_col))
                advance(n - i)
                continue
            tokens.append(Token(TokenKind.COMMENT, source[i:j + 2], tok_line, tok_col))
            advance(j + 2 - i)
            continue

        # strings
        if c == '"':
            j = i + 1
            closed = False
            while j < n:
                if source[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if source[j] == '"':
                    closed = True
                    break
                if source[j] == "\n":
                    break
                j += 1
            if not closed:
                diags.append(Diagnostic(Severity.ERROR, E_LEX, tok_line, tok_col,
                                        "unterminated string literal"))
                advance(j - i)
                continue
            tokens.append(Token(TokenKind.STRING, source[i:j + 1], tok_line, tok_col))
            advance(j + 1 - i)
            continue

        # numbers: optional decimal size, then 'base digits; or plain decimal
        if c.isdigit() or (c == "'" and i + 1 < n):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "_"):
                j += 1
            if j < n and source[j] == "'":
                k = j + 1
                if k < n and source[k] in "sS":
                    k += 1
                if k < n and source[k].lower() in _BASE_DIGITS:
                    base = source[k].lower()
                    k += 1
                    start_digits = k
                    allowed = _BASE_DIGITS[base]
                    while k < n and source[k].lower() in allowed:
                        k += 1
                    if k == start_digits:
                        diags.append(Diagnostic(Severity.ERROR, E_LEX, tok_line, tok_col,
                                                f"based literal has no digits: {source[i:k]!r}"))
                        advance(k - i)
                        continue
                    tokens.append(Token(TokenKind.NUMBER, source[i:k], tok_line, tok_col))
                    advance(k - i)
                    continue
                diags.append(Diagnostic(Severity.ERROR, E_LEX, tok_line, tok_col,
                                        "malformed based literal"))
                advance(j + 1 - i)
                continue
            if j > i:
                tokens.append(Token(TokenKind.NUMBER, source[i:j], tok_line, tok_col))
                advance(j - i)
                continue

        # identifiers / keywords
        if _ident_start(c):
            j = i + 1
            while j < n and _ident_char(source[j]):
                j += 1
            word = source[i:j]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, tok_line, tok_col))
            advance(j - i)
            continue

        # system task/function names
        if c == "$":
            j = i + 1
            while j < n and _ident_char(source[j]):
                j += 1
            tokens.append(Token(TokenKind.SYSNAME, source[i:j], tok_line, tok_col))
            advance(j - i)
            continue

        # punctuation, longest match first
        matched = False
        for length, table in ((3, _PUNCT3), (2, _PUNCT2), (1, _PUNCT1)):
            chunk = source[i:i + length]
            if chunk in table:
                tokens.append(Token(table[chunk], chunk, tok_line, tok_col))
                advance(length)
                matched = True
                break
        if matched:
            continue

        diags.append(Diagnostic(Severity.ERROR, E_LEX, tok_line, tok_col,
                                f"illegal character {c!r}"))
        advance(1)

    return tokens, diags


def code_tokens(tokens: List[Token]) -> List[Token]:
    """Tokens with trivia stripped, as consumed by the parser."""
    return [t for t in tokens if t.kind is not TokenKind.COMMENT]
