"""Token-level behavior: positions, literals, comments, error recovery."""

from trojangym.verilog.lexer import code_tokens, tokenize
from trojangym.verilog.tokens import TokenKind


def kinds(source):
    tokens, _ = tokenize(source)
    return [t.kind.name for t in tokens]


def test_keywords_vs_identifiers():
    tokens, diags = tokenize("module modulex endmodule ender")
    assert not diags
    assert [(t.kind.name, t.lexeme) for t in tokens] == [
        ("KEYWORD", "module"),
        ("IDENT", "modulex"),
        ("KEYWORD", "endmodule"),
        ("IDENT", "ender"),
    ]


def test_line_and_column_positions():
    tokens, _ = tokenize("wire x;\n  assign x = 1;\n")
    assign = next(t for t in tokens if t.lexeme == "assign")
    assert (assign.line, assign.column) == (2, 3)
    one = next(t for t in tokens if t.lexeme == "1")
    assert (one.line, one.column) == (2, 14)


def test_based_literals_are_single_tokens():
    tokens, diags = tokenize("4'b1010 16'hDEAD 8'o17 'd42 12'd999")
    assert not diags
    assert all(t.kind is TokenKind.NUMBER for t in tokens)
    assert [t.lexeme for t in tokens] == [
        "4'b1010", "16'hDEAD", "8'o17", "'d42", "12'd999"]


def test_two_char_operators_win_over_singles():
    pairs = {
        "<=": "LE", ">=": "GE", "==": "EQEQ", "!=": "NEQ",
        "&&": "AMPAMP", "||": "PIPEPIPE", "<<": "SHL", ">>": "SHR",
    }
    for lexeme, kind in pairs.items():
        tokens, diags = tokenize(f"a {lexeme} b")
        assert not diags
        assert tokens[1].kind.name == kind, lexeme
        assert tokens[1].lexeme == lexeme


def test_comments_are_trivia_and_skipped_by_code_tokens():
    source = "// leading\nmodule /* inline */ m; // trailing\n"
    tokens, diags = tokenize(source)
    assert not diags
    assert [t.kind.name for t in tokens] == [
        "COMMENT", "KEYWORD", "COMMENT", "IDENT", "SEMI", "COMMENT"]
    assert [t.kind.name for t in code_tokens(tokens)] == [
        "KEYWORD", "IDENT", "SEMI"]


def test_illegal_character_is_reported_and_skipped():
    tokens, diags = tokenize("wire `x;")
    assert len(diags) == 1
    assert diags[0].code == "E_LEX"
    assert "`" in diags[0].message
    # lexing continues past the bad character
    assert [t.lexeme for t in tokens] == ["wire", "x", ";"]


def test_unterminated_block_comment():
    _, diags = tokenize("module m; /* never closed\nwire x;")
    assert [d.code for d in diags] == ["E_LEX"]
    assert "unterminated" in diags[0].message


def test_empty_source_yields_no_tokens():
    tokens, diags = tokenize("")
    assert tokens == [] and diags == []
