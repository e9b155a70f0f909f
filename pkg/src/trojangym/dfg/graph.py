"""Data-flow graph value type, stats, and the DFG v1 text format."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple


class NodeKind(Enum):
    SIGNAL = "SIGNAL"
    CONST = "CONST"
    OP = "OP"
    BRANCH = "BRANCH"
    INSTANCE_PORT = "INSTANCE_PORT"


@dataclass(frozen=True)
class DfgNode:
    id: int
    kind: NodeKind
    label: str


@dataclass
class GraphMeta:
    node_count: int = 0
    edge_count: int = 0
    extraction_seconds: float = 0.0


@dataclass
class Dfg:
    """Nodes in canonical order (signals by declaration, the rest by
    traversal), edges sorted by (src, dst). Meta never participates in
    equality."""

    nodes: List[DfgNode] = field(default_factory=list)
    edges: List[Tuple[int, int]] = field(default_factory=list)
    meta: GraphMeta = field(default_factory=GraphMeta, compare=False)

    def validate(self) -> None:
        count = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise DfgError(f"node ids are not dense: position {i} holds id {node.id}")
        seen = set()
        prev = (-1, -1)
        for src, dst in self.edges:
            if not (0 <= src < count and 0 <= dst < count):
                raise DfgError(f"edge ({src}, {dst}) references a missing node")
            if src == dst:
                raise DfgError(f"self-loop on node {src}")
            if (src, dst) in seen:
                raise DfgError(f"duplicate edge ({src}, {dst})")
            if (src, dst) < prev:
                raise DfgError(f"edges not sorted at ({src}, {dst})")
            seen.add((src, dst))
            prev = (src, dst)


class DfgError(Exception):
    pass


class UnsupportedConstructError(DfgError):
    """The tree holds a construct with no graph mapping."""


class DfgFormatError(DfgError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def graph_stats(dfg: Dfg) -> GraphMeta:
    return GraphMeta(node_count=len(dfg.nodes), edge_count=len(dfg.edges),
                     extraction_seconds=dfg.meta.extraction_seconds)


def stats_line(filename: str, dfg: Dfg) -> str:
    """The machine-readable stats row logged after graph construction."""
    meta = graph_stats(dfg)
    return (f"{filename} , {meta.node_count} , {meta.edge_count} , "
            f"{meta.extraction_seconds!r}")


def serialize_dfg(dfg: Dfg) -> str:
    lines = [f"DFG v1 {len(dfg.nodes)} {len(dfg.edges)}"]
    for node in dfg.nodes:
        lines.append(f"N {node.id} {node.kind.value} {node.label}")
    for src, dst in dfg.edges:
        lines.append(f"E {src} {dst}")
    return "\n".join(lines) + "\n"


def deserialize_dfg(text: str) -> Dfg:
    lines = text.splitlines()
    if not lines:
        raise DfgFormatError(1, "empty input")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "DFG" or head[1] != "v1":
        raise DfgFormatError(1, f"bad header {lines[0]!r}")
    try:
        n_nodes, n_edges = int(head[2]), int(head[3])
    except ValueError:
        raise DfgFormatError(1, f"bad header counts {lines[0]!r}") from None

    nodes: List[DfgNode] = []
    edges: List[Tuple[int, int]] = []
    for offset, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        if raw.startswith("N "):
            parts = raw.split(" ", 3)
            if len(parts) != 4:
                raise DfgFormatError(offset, f"bad node line {raw!r}")
            if edges:
                raise DfgFormatError(offset, "node line after edge lines")
            try:
                node_id = int(parts[1])
                kind = NodeKind(parts[2])
            except ValueError:
                raise DfgFormatError(offset, f"bad node line {raw!r}") from None
            if node_id != len(nodes):
                raise DfgFormatError(offset, f"node id {node_id} out of order")
            nodes.append(DfgNode(id=node_id, kind=kind, label=parts[3]))
        elif raw.startswith("E "):
            parts = raw.split()
            if len(parts) != 3:
                raise DfgFormatError(offset, f"bad edge line {raw!r}")
            try:
                edges.append((int(parts[1]), int(parts[2])))
            except ValueError:
                raise DfgFormatError(offset, f"bad edge line {raw!r}") from None
        else:
            raise DfgFormatError(offset, f"unrecognized line {raw!r}")

    if len(nodes) != n_nodes:
        raise DfgFormatError(1, f"header claims {n_nodes} nodes, body has {len(nodes)}")
    if len(edges) != n_edges:
        raise DfgFormatError(1, f"header claims {n_edges} edges, body has {len(edges)}")
    dfg = Dfg(nodes=nodes, edges=edges,
              meta=GraphMeta(node_count=n_nodes, edge_count=n_edges))
    try:
        dfg.validate()
    except DfgError as exc:
        raise DfgFormatError(1, str(exc)) from None
    return dfg


def adjacency_csv(dfg: Dfg) -> str:
    """Plain ``src,dst`` rows for external graph tooling."""
    return "".join(f"{src},{dst}\n" for src, dst in dfg.edges)


def labeled_edges(dfg: Dfg) -> List[Tuple[str, str, str, str]]:
    """Edges as (src kind, src label, dst kind, dst label) tuples."""
    out = []
    for src, dst in dfg.edges:
        s, d = dfg.nodes[src], dfg.nodes[dst]
        out.append((s.kind.value, s.label, d.kind.value, d.label))
    return out


def kind_counts(dfg: Dfg) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for node in dfg.nodes:
        counts[node.kind.value] = counts.get(node.kind.value, 0) + 1
    return counts
