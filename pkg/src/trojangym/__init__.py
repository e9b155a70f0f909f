"""Detector-gated hardware-Trojan insertion gym for Verilog RTL.

The pipeline, end to end: an LLM backend proposes a Trojan insertion into a
clean design; a Verilog front end gates it on syntax and interface
preservation; a GNN ensemble scores the design's data-flow graph; detected
designs are sent back for adversarial refinement; every episode is emitted
into an on-disk corpus that the analysis layer turns into similarity
matrices and evasion curves.
"""

from .core import HtType, SourceDesign, VARIANT_ORDER, Variant

__version__ = "0.1.0"

__all__ = [
    "HtType",
    "SourceDesign",
    "VARIANT_ORDER",
    "Variant",
    "__version__",
]
