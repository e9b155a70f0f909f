"""Node featurization: 17 dims = kind one-hot(5) + op family one-hot(8)
+ log-degree bucket one-hot(4)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dfg import Dfg, NodeKind

KIND_ORDER = (NodeKind.SIGNAL, NodeKind.CONST, NodeKind.OP,
              NodeKind.BRANCH, NodeKind.INSTANCE_PORT)

# operator families: logic, add/sub, mul, shift, cmp, mux, eq, other
N_FAMILIES = 8
_FAMILY_OF = {}
for _m in ("AND", "OR", "XOR", "XNOR", "NOT", "LAND", "LOR", "LNOT",
           "RAND", "ROR", "RXOR", "RNAND", "RNOR", "RXNOR"):
    _FAMILY_OF[_m] = 0
for _m in ("ADD", "SUB", "NEG", "POS"):
    _FAMILY_OF[_m] = 1
for _m in ("MUL", "DIV", "MOD"):
    _FAMILY_OF[_m] = 2
for _m in ("SHL", "SHR", "ASHR"):
    _FAMILY_OF[_m] = 3
for _m in ("LT", "LE", "GT", "GE"):
    _FAMILY_OF[_m] = 4
_FAMILY_MUX = 5
for _m in ("EQ", "NEQ", "CASEEQ", "CASENEQ"):
    _FAMILY_OF[_m] = 6
_FAMILY_OTHER = 7

N_KINDS = len(KIND_ORDER)
N_DEGREE_BUCKETS = 4
FEATURE_DIM = N_KINDS + N_FAMILIES + N_DEGREE_BUCKETS


class EmptyGraphError(ValueError):
    """E_EMPTY_GRAPH: featurization needs at least one node."""


@dataclass
class GraphFeatures:
    node_features: np.ndarray  # N x FEATURE_DIM
    adjacency: np.ndarray      # N x N, symmetrized, self-loops included
    norm: np.ndarray           # degree^{-1/2} of the self-looped adjacency

    @property
    def n_nodes(self) -> int:
        return self.node_features.shape[0]

    def a_hat(self) -> np.ndarray:
        """Symmetric-normalized adjacency D^-1/2 (A+I) D^-1/2."""
        return self.adjacency * np.outer(self.norm, self.norm)


def _family(kind: NodeKind, label: str) -> int:
    if kind is NodeKind.BRANCH:
        return _FAMILY_MUX
    if kind is NodeKind.OP:
        return _FAMILY_OF.get(label, _FAMILY_OTHER)
    return _FAMILY_OTHER


def _degree_bucket(degree: int) -> int:
    return min(N_DEGREE_BUCKETS - 1, int(np.log2(degree + 1)))


def featurize(dfg: Dfg) -> GraphFeatures:
    n = len(dfg.nodes)
    if n == 0:
        raise EmptyGraphError("cannot featurize a graph with no nodes")

    adjacency = np.zeros((n, n), dtype=np.float64)
    for src, dst in dfg.edges:
        adjacency[src, dst] = 1.0
        adjacency[dst, src] = 1.0
    neighbor_degree = adjacency.sum(axis=1).astype(np.int64)
    np.fill_diagonal(adjacency, 1.0)

    feats = np.zeros((n, FEATURE_DIM), dtype=np.float64)
    kind_index = {kind: i for i, kind in enumerate(KIND_ORDER)}
    for node in dfg.nodes:
        feats[node.id, kind_index[node.kind]] = 1.0
        feats[node.id, N_KINDS + _family(node.kind, node.label)] = 1.0
        bucket = _degree_bucket(int(neighbor_degree[node.id]))
        feats[node.id, N_KINDS + N_FAMILIES + bucket] = 1.0

    norm = 1.0 / np.sqrt(adjacency.sum(axis=1))
    return GraphFeatures(node_features=feats, adjacency=adjacency, norm=norm)
