"""Post-hoc corpus analytics.

Three products: pairwise edge-Jaccard similarity across a lineage's
variants (how much structure each refinement preserved), per-attempt
detection/evasion curves with an oracle-best envelope, and the aggregate
evasion statistics.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .core import HtType, Variant, VARIANT_ORDER
from .dfg import Dfg
from .dfg.graph import labeled_edges
from .orchestrator.episode import AttemptOutcome, EpisodeRecord, Terminal

__all__ = [
    "EmptyCorpusError",
    "SimilarityMatrix",
    "AttemptCurve",
    "AggregateMetrics",
    "edge_jaccard",
    "similarity_matrix",
    "similarity_csv",
    "aggregate_metrics",
    "curves_csv",
    "summary_text",
]

MAX_ATTEMPTS = 4


class EmptyCorpusError(ValueError):
    """E_EMPTY: metrics over zero (non-aborted) episodes are undefined."""


def _edge_multiset(dfg: Dfg) -> frozenset:
    """Labeled edges with per-duplicate occurrence indexes.

    Node ids differ across variants, so an edge is identified by its
    endpoints' (kind, label) pairs; the occurrence index keeps Jaccard
    sensitive to duplicated logic (the same operator applied twice to the
    same signals counts twice).
    """
    seen: Counter = Counter()
    out = set()
    for edge in labeled_edges(dfg):
        out.add((edge, seen[edge]))
        seen[edge] += 1
    return frozenset(out)


def edge_jaccard(a: Dfg, b: Dfg) -> float:
    """|Ea ∩ Eb| / |Ea ∪ Eb| over labeled edges; 1.0 when both are empty."""
    ea, eb = _edge_multiset(a), _edge_multiset(b)
    if not ea and not eb:
        return 1.0
    return len(ea & eb) / len(ea | eb)


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: Tuple[Variant, ...]
    values: Tuple[Tuple[Optional[float], ...], ...]  # None = NA
    context: Tuple[str, str, str]  # (backend_id, design_id, ht name)

    def value(self, a: Variant, b: Variant) -> Optional[float]:
        return self.values[self.labels.index(a)][self.labels.index(b)]


def similarity_matrix(variants: Mapping[Variant, Dfg],
                      context: Tuple[str, str, str] = ("", "", "")
                      ) -> SimilarityMatrix:
    """Pairwise edge Jaccard over present variants; NA where absent."""
    if Variant.ORI not in variants:
        raise ValueError("similarity matrix requires the ORI variant")
    labels = tuple(VARIANT_ORDER)
    rows = []
    for a in labels:
        row: List[Optional[float]] = []
        for b in labels:
            if a in variants and b in variants:
                row.append(edge_jaccard(variants[a], variants[b]))
            else:
                row.append(None)
        rows.append(tuple(row))
    return SimilarityMatrix(labels=labels, values=tuple(rows),
                            context=context)


def similarity_csv(matrix: SimilarityMatrix) -> str:
    header = "," + ",".join(v.value for v in matrix.labels)
    lines = [header]
    for label, row in zip(matrix.labels, matrix.values):
        cells = ["NA" if v is None else f"{v:.6f}" for v in row]
        lines.append(label.value + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AttemptCurve:
    """Rates indexed by attack attempt k = 1..4 (1 = initial insertion).

    detection_rate[k-1]: among episodes that performed attempt k, the
    fraction whose attempt-k variant compiled and was detected (None when
    no episode reached k). cumulative_evasion_rate[k-1]: fraction of all
    episodes terminally EVADED at an attempt <= k — non-decreasing.
    """

    series_id: str
    detection_rate: Tuple[Optional[float], ...]
    cumulative_evasion_rate: Tuple[float, ...]


@dataclass(frozen=True)
class AggregateMetrics:
    curves: Dict[str, AttemptCurve]  # per backend_id plus "optimal"
    overall_evasion: float
    oracle_evasion: float
    n_episodes: int
    n_groups: int


def _evasion_attempt(record: EpisodeRecord) -> Optional[int]:
    for attempt in record.attempts:
        if attempt.outcome is AttemptOutcome.EVADED:
            return attempt.attack_attempt
    return None


def _attempted(record: EpisodeRecord) -> set:
    return {a.attack_attempt for a in record.attempts}


def _detected_at(record: EpisodeRecord) -> set:
    return {a.attack_attempt for a in record.attempts
            if a.outcome is AttemptOutcome.DETECTED}


def _curve(series_id: str, evasions: Sequence[Optional[int]],
           attempted: Sequence[set], detected: Sequence[set]) -> AttemptCurve:
    total = len(evasions)
    detection: List[Optional[float]] = []
    cumulative: List[float] = []
    for k in range(1, MAX_ATTEMPTS + 1):
        reaching = sum(1 for s in attempted if k in s)
        hits = sum(1 for s in detected if k in s)
        detection.append(hits / reaching if reaching else None)
        evaded = sum(1 for e in evasions if e is not None and e <= k)
        cumulative.append(evaded / total if total else 0.0)
    return AttemptCurve(series_id=series_id,
                        detection_rate=tuple(detection),
                        cumulative_evasion_rate=tuple(cumulative))


def aggregate_metrics(records: Sequence[EpisodeRecord]) -> AggregateMetrics:
    """Evasion statistics over non-aborted episodes.

    The optimal series treats each (design, ht) group as one pseudo-episode
    taking the best outcome across backends; with every backend covering
    every group (the usual full grid) it dominates each backend's
    cumulative-evasion curve pointwise.
    """
    usable = [r for r in records if r.terminal is not Terminal.ABORTED]
    if not usable:
        raise EmptyCorpusError("no non-aborted episodes to aggregate")

    by_backend: Dict[str, List[EpisodeRecord]] = {}
    for record in usable:
        by_backend.setdefault(record.backend_id, []).append(record)

    curves: Dict[str, AttemptCurve] = {}
    for backend_id, group in sorted(by_backend.items()):
        curves[backend_id] = _curve(
            backend_id,
            [_evasion_attempt(r) for r in group],
            [_attempted(r) for r in group],
            [_detected_at(r) for r in group],
        )

    groups: Dict[Tuple[str, HtType], List[EpisodeRecord]] = {}
    for record in usable:
        groups.setdefault((record.design_id, record.ht_type), []).append(record)

    group_evasions: List[Optional[int]] = []
    group_attempted: List[set] = []
    group_detected: List[set] = []
    for members in groups.values():
        evasions = [e for e in (_evasion_attempt(r) for r in members)
                    if e is not None]
        best = min(evasions) if evasions else None
        group_evasions.append(best)
        attempted = set().union(*(_attempted(r) for r in members))
        group_attempted.append(attempted)
        detected = set()
        for k in sorted(attempted):
            if best is not None and best <= k:
                break
            if any(k in _detected_at(r) for r in members):
                detected.add(k)
        group_detected.append(detected)
    curves["optimal"] = _curve("optimal", group_evasions, group_attempted,
                               group_detected)

    n_evaded = sum(1 for r in usable if r.terminal is Terminal.EVADED)
    n_groups_evaded = sum(1 for e in group_evasions if e is not None)
    return AggregateMetrics(
        curves=curves,
        overall_evasion=n_evaded / len(usable),
        oracle_evasion=n_groups_evaded / len(groups),
        n_episodes=len(usable),
        n_groups=len(groups),
    )


def curves_csv(metrics: AggregateMetrics) -> str:
    lines = [
        "# attempt k: 1 = initial insertion, 2..4 = refinement rounds",
        "# detection_rate: detected / episodes reaching attempt k "
        "(empty when none reach k)",
        "# cum_evasion: episodes terminally evaded at attempt <= k / "
        "all episodes",
        "backend,attempt,detection_rate,cum_evasion",
    ]
    for series_id in sorted(metrics.curves):
        curve = metrics.curves[series_id]
        for k in range(1, MAX_ATTEMPTS + 1):
            rate = curve.detection_rate[k - 1]
            cell = "" if rate is None else f"{rate:.6f}"
            lines.append(f"{series_id},{k},{cell},"
                         f"{curve.cumulative_evasion_rate[k - 1]:.6f}")
    return "\n".join(lines) + "\n"


def summary_text(metrics: AggregateMetrics) -> str:
    return (
        f"episodes={metrics.n_episodes}\n"
        f"groups={metrics.n_groups}\n"
        f"overall_evasion={metrics.overall_evasion * 100:.2f}%\n"
        f"oracle_evasion={metrics.oracle_evasion * 100:.2f}%\n"
    )
