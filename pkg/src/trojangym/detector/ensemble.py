"""Four-model ensemble: one binary classifier per HT type, OR-combined.

A design is flagged TROJAN when any model's trojan probability reaches the
threshold; only a design that clears all four models counts as clean.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from ..core import HtType
from ..dfg import Dfg
from .features import featurize
from .gcn import GcnModel, forward


class Decision(Enum):
    CLEAN = "CLEAN"
    TROJAN = "TROJAN"


@dataclass
class Prediction:
    per_model: Dict[HtType, Tuple[float, float]]  # ht -> (clean, trojan)
    triggered: frozenset
    decision: Decision

    def trojan_prob(self, ht: HtType) -> float:
        return self.per_model[ht][1]


def assemble_prediction(per_model: Dict[HtType, Tuple[float, float]],
                        threshold: float) -> Prediction:
    """The pure decision rule, separated so it can be replayed on logged
    probabilities without any model."""
    triggered = frozenset(ht for ht, (_, trojan_p) in per_model.items()
                          if trojan_p >= threshold)
    decision = Decision.TROJAN if triggered else Decision.CLEAN
    return Prediction(per_model=dict(per_model), triggered=triggered,
                      decision=decision)


@dataclass
class TrojanEnsemble:
    models: Dict[HtType, GcnModel]
    threshold: float = 0.5

    def __post_init__(self):
        missing = [ht.name for ht in HtType if ht not in self.models]
        if missing:
            raise ValueError(f"ensemble is missing models for {missing}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")

    def predict(self, dfg: Dfg) -> Prediction:
        """Read-only and safe to call concurrently."""
        feats = featurize(dfg)
        per_model: Dict[HtType, Tuple[float, float]] = {}
        for ht in HtType:
            clean_p, trojan_p, _ = forward(self.models[ht], feats)
            per_model[ht] = (clean_p, trojan_p)
        return assemble_prediction(per_model, self.threshold)

    def predict_with_budget(self, dfg: Dfg,
                            budget_seconds: Optional[float] = 60.0,
                            ) -> Optional[Prediction]:
        """Like predict, but None once the wall-clock budget is exhausted
        (checked before each model), standing in for an inference timeout."""
        started = time.perf_counter()
        feats = featurize(dfg)
        per_model: Dict[HtType, Tuple[float, float]] = {}
        for ht in HtType:
            if budget_seconds is not None \
                    and time.perf_counter() - started > budget_seconds:
                return None
            clean_p, trojan_p, _ = forward(self.models[ht], feats)
            per_model[ht] = (clean_p, trojan_p)
        return assemble_prediction(per_model, self.threshold)

    def embed(self, dfg: Dfg) -> Dict[HtType, np.ndarray]:
        feats = featurize(dfg)
        return {ht: forward(self.models[ht], feats)[2] for ht in HtType}

    def fingerprint(self) -> str:
        """Stable short id over weights and threshold, recorded in episode
        logs so replays can be matched to the detector that produced them."""
        digest = hashlib.sha256()
        digest.update(f"threshold={self.threshold!r}".encode())
        for ht in HtType:
            params = self.models[ht].params
            for name, arr in sorted(params.arrays().items()):
                digest.update(name.encode())
                digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()[:12]
