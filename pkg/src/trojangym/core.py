"""Core domain types shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class HtType(Enum):
    """The four Trojan intents a detector model can be trained against."""

    HT1 = "change functionality"
    HT2 = "information leakage"
    HT3 = "denial of service"
    HT4 = "performance degradation"

    @property
    def description(self) -> str:
        return self.value

    def __str__(self) -> str:
        return self.name


class Variant(Enum):
    """Design lineage label: clean baseline or k-th refined attempt."""

    ORI = "ORI"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"

    def __str__(self) -> str:
        return self.value


VARIANT_ORDER = [Variant.ORI, Variant.A1, Variant.A2, Variant.A3, Variant.A4]


@dataclass(frozen=True)
class SourceDesign:
    """A named Verilog source with provenance.

    ``variant`` is ORI for the trusted baseline; A1..A4 are successively
    generated Trojan-infected versions of the same design.
    """

    design_id: str
    source: str
    variant: Variant = Variant.ORI
    ht_type: Optional[HtType] = None
    backend_id: str = ""
    byte_len: int = field(default=-1)

    def __post_init__(self):
        if not self.source:
            raise ValueError("source must be non-empty")
        if self.variant is Variant.ORI and self.ht_type is not None:
            raise ValueError("ORI designs carry no ht_type")
        if self.byte_len < 0:
            object.__setattr__(self, "byte_len", len(self.source.encode("utf-8")))
