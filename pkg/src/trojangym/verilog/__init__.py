"""Verilog front end: lexer, parser, pretty-printer and compile checks."""

from . import nodes
from .check import external_check, interface_diagnostics, parse_for_top, syntax_check
from .diagnostics import (
    CheckReport,
    Diagnostic,
    E_FORMAT,
    E_INTERFACE,
    Severity,
    sort_diagnostics,
)
from .lexer import code_tokens, tokenize
from .nodes import Ast, ModuleDecl, port_signature
from .parser import ParseResult, parse, parse_source
from .printer import expr_text, print_ast, print_module
from .tokens import Token, TokenKind

__all__ = [
    "Ast",
    "CheckReport",
    "Diagnostic",
    "E_FORMAT",
    "E_INTERFACE",
    "ModuleDecl",
    "ParseResult",
    "Severity",
    "Token",
    "TokenKind",
    "code_tokens",
    "expr_text",
    "external_check",
    "interface_diagnostics",
    "nodes",
    "parse",
    "parse_for_top",
    "parse_source",
    "port_signature",
    "print_ast",
    "print_module",
    "sort_diagnostics",
    "syntax_check",
    "tokenize",
]
