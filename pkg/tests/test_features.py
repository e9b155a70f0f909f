"""Node featurization shape and invariant checks."""

import numpy as np
import pytest

from trojangym.detector import FEATURE_DIM, EmptyGraphError, featurize
from trojangym.dfg import Dfg, build_dfg
from trojangym.verilog import parse_source

SOURCE = """module feat_demo (
    input wire clk,
    input wire [7:0] a,
    input wire [7:0] b,
    input wire sel,
    output reg [7:0] q
);
    always @(posedge clk) begin
        q <= sel ? (a + b) : (a ^ 8'h1f);
    end
endmodule
"""


@pytest.fixture(scope="module")
def graph():
    return build_dfg(parse_source(SOURCE).ast)


def test_feature_matrix_shape(graph):
    feats = featurize(graph)
    n = len(graph.nodes)
    assert feats.node_features.shape == (n, FEATURE_DIM)
    assert feats.adjacency.shape == (n, n)
    assert feats.norm.shape == (n,)
    assert feats.n_nodes == n


def test_rows_are_three_hot(graph):
    feats = featurize(graph)
    # one kind bit + one family bit + one degree bit per node
    assert np.all(feats.node_features.sum(axis=1) == 3.0)
    assert set(np.unique(feats.node_features)) <= {0.0, 1.0}


def test_adjacency_symmetric_with_self_loops(graph):
    feats = featurize(graph)
    assert np.array_equal(feats.adjacency, feats.adjacency.T)
    assert np.all(np.diag(feats.adjacency) == 1.0)


def test_a_hat_rows_of_isolated_node_are_identity():
    dfg = build_dfg(parse_source("""module lonely (
    input wire a,
    output wire y
);
    assign y = a;
endmodule
""").ast)
    feats = featurize(dfg)
    a_hat = feats.a_hat()
    # symmetric normalization keeps row sums in (0, 1]
    sums = a_hat.sum(axis=1)
    assert np.all(sums > 0.0)
    assert np.all(sums <= 1.0 + 1e-12)


def test_featurize_is_deterministic(graph):
    one = featurize(graph)
    two = featurize(graph)
    assert np.array_equal(one.node_features, two.node_features)
    assert np.array_equal(one.adjacency, two.adjacency)


def test_empty_graph_rejected():
    with pytest.raises(EmptyGraphError):
        featurize(Dfg())
