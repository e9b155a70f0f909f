"""Graph-extraction properties: determinism, rename invariance, round-trip."""

import re
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trojangym.core import HtType
from trojangym.dfg import (build_dfg, deserialize_dfg, labeled_edges,
                           serialize_dfg, stats_line)
from trojangym.dfg.graph import NodeKind
from trojangym.synth import generate_clean_source, infect
from trojangym.verilog import parse_source
from trojangym.verilog.lexer import tokenize
from trojangym.verilog.tokens import TokenKind


def extract(source):
    return build_dfg(parse_source(source).ast)


def generated_source(seed: int) -> str:
    rng = np.random.default_rng(seed)
    source = generate_clean_source(rng, seed % 100)
    if seed % 5 == 0:
        ht = list(HtType)[seed % 4]
        source = infect(source, ht, rng)
    return source


def rename_identifiers(source: str, prefix: str) -> str:
    """Rename every identifier via its token position (keywords excluded)."""
    tokens, diags = tokenize(source)
    assert not diags
    lines = source.split("\n")
    idents = [t for t in tokens if t.kind is TokenKind.IDENT]
    for token in sorted(idents, key=lambda t: (t.line, t.column),
                        reverse=True):
        row = token.line - 1
        col = token.column - 1
        line = lines[row]
        assert line[col:col + len(token.lexeme)] == token.lexeme
        lines[row] = (line[:col] + prefix + token.lexeme
                      + line[col + len(token.lexeme):])
    return "\n".join(lines)


def test_extraction_is_deterministic_across_100_runs():
    source = generated_source(3)
    reference = serialize_dfg(extract(source))
    for _ in range(99):
        assert serialize_dfg(extract(source)) == reference


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=99999))
def test_serialize_round_trip(seed):
    dfg = extract(generated_source(seed))
    assert deserialize_dfg(serialize_dfg(dfg)) == dfg


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=99999))
def test_alpha_rename_preserves_topology(seed):
    source = generated_source(seed)
    original = extract(source)
    renamed = extract(rename_identifiers(source, "zz"))

    def mapped(dfg, apply_prefix):
        edges = []
        for src_kind, src_label, dst_kind, dst_label in labeled_edges(dfg):
            if apply_prefix and src_kind == "SIGNAL":
                src_label = "zz" + src_label
            if apply_prefix and dst_kind == "SIGNAL":
                dst_label = "zz" + dst_label
            edges.append((src_kind, src_label, dst_kind, dst_label))
        return Counter(edges)

    assert mapped(original, True) == mapped(renamed, False)
    assert len(original.nodes) == len(renamed.nodes)
    assert len(original.edges) == len(renamed.edges)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=99999))
def test_node_ids_are_dense_and_edges_resolve(seed):
    dfg = extract(generated_source(seed))
    ids = [node.id for node in dfg.nodes]
    assert ids == list(range(len(dfg.nodes)))
    for src, dst in dfg.edges:
        assert 0 <= src < len(dfg.nodes)
        assert 0 <= dst < len(dfg.nodes)
    assert dfg.meta.node_count == len(dfg.nodes)
    assert dfg.meta.edge_count == len(dfg.edges)


def test_adding_logic_grows_the_graph():
    source = generated_source(7)
    base = extract(source)
    grown_source = source.replace(
        "endmodule",
        "    wire probe_tap;\n"
        "    assign probe_tap = ht_free_name ^ 1'b1;\nendmodule").replace(
        "ht_free_name", source_first_input(source))
    grown = extract(grown_source)
    assert len(grown.nodes) > len(base.nodes)
    assert len(grown.edges) > len(base.edges)


def source_first_input(source: str) -> str:
    match = re.search(r"input wire(?: \[[^\]]+\])? (\w+)", source)
    assert match is not None
    return match.group(1)


def test_select_bounds_become_const_nodes():
    dfg = extract("""module m (
    input wire [15:0] d,
    output wire [7:0] y
);
    assign y = d[11:4];
endmodule
""")
    consts = {node.label for node in dfg.nodes
              if node.kind is NodeKind.CONST}
    assert "11" in consts and "4" in consts


def test_stats_line_format():
    dfg = extract(generated_source(11))
    line = stats_line("designs/foo.v", dfg)
    match = re.fullmatch(
        r"designs/foo\.v , (\d+) , (\d+) , (\d+\.\d+(?:e-?\d+)?)", line)
    assert match is not None
    assert int(match.group(1)) == len(dfg.nodes)
    assert int(match.group(2)) == len(dfg.edges)
    # the timing field is repr()'d, so it parses back exactly
    assert float(match.group(3)) == dfg.meta.extraction_seconds


def test_deserialize_rejects_garbage():
    from trojangym.dfg.graph import DfgFormatError
    with pytest.raises(DfgFormatError):
        deserialize_dfg("not a graph\n")
