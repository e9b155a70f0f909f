"""Bit-exact detection-log rendering.

The log is the adversarial feedback channel: its text is embedded verbatim
in evasion prompts and written to the corpus, so its layout is frozen —
four bracketed sections, per-model verdict lines with 4-decimal
probabilities, the triggered-model list, and the final decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..core import HtType
from ..detector.ensemble import Decision, Prediction
from ..dfg.graph import GraphMeta

__all__ = ["LogFiles", "format_detection_log"]


@dataclass(frozen=True)
class LogFiles:
    test_file: str
    log_file: str


def format_detection_log(files: LogFiles, stats: GraphMeta,
                         prediction: Prediction,
                         stats_filename: Optional[str] = None) -> str:
    """Render the full log. ``stats_filename`` defaults to the test file

    and only exists because environments may report the graph-construction
    row against a staging path rather than the corpus path.
    """
    filename = stats_filename if stats_filename is not None else files.test_file
    lines = [
        "% [FILES]:",
        "Test file:",
        f"  {files.test_file}",
        "",
        "Log file:",
        f"  {files.log_file}",
        "",
        "% [INITIALIZATION]:",
        "Initializing...",
        "Loading models...",
    ]
    for ht in HtType:
        lines.append(f"  ✓ {ht.name} loaded")
    lines += [
        "Total models loaded: 4",
        "",
        "% [GRAPH CONSTRUCTION]:",
        "Preparing test design...",
        "Converting design to graph...",
        "",
        f"{filename} , {stats.node_count} , {stats.edge_count} , "
        f"{stats.extraction_seconds!r}",
        f"Graph: {stats.node_count} nodes, {stats.edge_count} edges",
        "",
        "% [DETECTION RESULTS]:",
        "Model Predictions:",
    ]
    for ht in HtType:
        clean_p, trojan_p = prediction.per_model[ht]
        label = "TROJAN" if ht in prediction.triggered else "CLEAN"
        lines.append(
            f"  {ht.name}:  {label:<8}| Clean={clean_p:.4f}, "
            f"Trojan={trojan_p:.4f}")
    triggered = [ht.name for ht in HtType if ht in prediction.triggered]
    lines += [
        "",
        f"Triggered Models: {', '.join(triggered) if triggered else 'none'}",
    ]
    if prediction.decision is Decision.TROJAN:
        lines.append("Final Decision:  TROJAN DETECTED")
    else:
        lines.append("Final Decision:  CLEAN")
    return "\n".join(lines) + "\n"
