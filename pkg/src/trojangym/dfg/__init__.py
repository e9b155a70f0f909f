"""Deterministic data-flow graphs extracted from parsed designs."""

from .extract import build_dfg, const_label
from .graph import (
    Dfg,
    DfgError,
    DfgFormatError,
    DfgNode,
    GraphMeta,
    NodeKind,
    UnsupportedConstructError,
    adjacency_csv,
    deserialize_dfg,
    graph_stats,
    kind_counts,
    labeled_edges,
    serialize_dfg,
    stats_line,
)

__all__ = [
    "Dfg",
    "DfgError",
    "DfgFormatError",
    "DfgNode",
    "GraphMeta",
    "NodeKind",
    "UnsupportedConstructError",
    "adjacency_csv",
    "build_dfg",
    "const_label",
    "deserialize_dfg",
    "graph_stats",
    "kind_counts",
    "labeled_edges",
    "serialize_dfg",
    "stats_line",
]
