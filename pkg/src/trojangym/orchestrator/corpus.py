"""Corpus emission: one directory per (design, HT, backend) episode.

Layout under the corpus root:

    <design>/<HT>/<backend>/
        ORI.v, A1.v ...                          variant sources
        check_NN_<PHASE>.txt                     per-attempt check reports
        explanation_NN.txt / taxonomy_NN.txt     agent artifacts
        detection_log_<design>_<HT>_<backend>_<Ak>.txt
        episode.json                             the full record (schema 1)
    manifest.tsv                                 one appended row per episode

Every file is staged and atomically renamed, so a crashed writer can never
leave the manifest pointing at half-written files. Re-emitting the same
record is idempotent: identical bytes, identical single manifest row.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

from ..core import HtType, SourceDesign, Variant
from ..detector.ensemble import Decision, Prediction
from ..verilog import CheckReport, Diagnostic, Severity
from .episode import Attempt, AttemptOutcome, EpisodeRecord, Phase, Terminal

__all__ = [
    "ManifestEntry",
    "write_corpus",
    "episode_to_dict",
    "episode_from_dict",
    "load_corpus_records",
    "read_manifest",
    "MANIFEST_FIELDS",
    "EPISODE_SCHEMA_VERSION",
    "EPISODE_JSON_SCHEMA",
]

EPISODE_SCHEMA_VERSION = 1
MANIFEST_FIELDS = ("design", "ht", "backend", "terminal", "n_attempts",
                   "timestamp")

_PROBABILITY = {"type": "number", "minimum": 0.0, "maximum": 1.0}
_HT_NAMES = [ht.name for ht in HtType]

#: JSON Schema (draft-07) for one episode.json document, schema version 1.
EPISODE_JSON_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "design_id", "ht_type", "backend_id",
                 "template_version", "detector_fingerprint", "terminal",
                 "abort_reason", "started_at", "duration_seconds",
                 "clean_source", "attempts"],
    "properties": {
        "schema": {"const": EPISODE_SCHEMA_VERSION},
        "design_id": {"type": "string", "minLength": 1},
        "ht_type": {"enum": _HT_NAMES},
        "backend_id": {"type": "string"},
        "template_version": {"type": "string"},
        "detector_fingerprint": {"type": "string"},
        "terminal": {"enum": [t.value for t in Terminal]},
        "abort_reason": {"type": "string"},
        "started_at": {"type": "number"},
        "duration_seconds": {"type": "number", "minimum": 0},
        "clean_source": {"type": "string", "minLength": 1},
        "attempts": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["seq", "phase", "index", "attack_attempt",
                             "variant", "source", "check", "outcome",
                             "prediction", "explanation", "taxonomy",
                             "detection_log", "detection_log_file"],
                "properties": {
                    "seq": {"type": "integer", "minimum": 0},
                    "phase": {"enum": [p.value for p in Phase]},
                    "index": {"type": "integer", "minimum": 0},
                    "attack_attempt": {"type": "integer",
                                       "minimum": 1, "maximum": 4},
                    "variant": {"enum": [v.value for v in Variant
                                         if v is not Variant.ORI]},
                    "source": {"type": "string"},
                    "check": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["ok", "summary", "diagnostics"],
                        "properties": {
                            "ok": {"type": "boolean"},
                            "summary": {"type": "string"},
                            "diagnostics": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["severity", "code", "line",
                                                 "column", "message"],
                                    "properties": {
                                        "severity": {"enum": ["ERROR",
                                                              "WARNING"]},
                                        "code": {"type": "string"},
                                        "line": {"type": "integer"},
                                        "column": {"type": "integer"},
                                        "message": {"type": "string"},
                                    },
                                },
                            },
                        },
                    },
                    "outcome": {"enum": [o.value for o in AttemptOutcome]},
                    "prediction": {
                        "oneOf": [
                            {"type": "null"},
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["per_model", "triggered",
                                             "decision"],
                                "properties": {
                                    "per_model": {
                                        "type": "object",
                                        "additionalProperties": False,
                                        "properties": {
                                            name: {
                                                "type": "array",
                                                "items": _PROBABILITY,
                                                "minItems": 2,
                                                "maxItems": 2,
                                            } for name in _HT_NAMES
                                        },
                                    },
                                    "triggered": {
                                        "type": "array",
                                        "items": {"enum": _HT_NAMES},
                                    },
                                    "decision": {
                                        "enum": [d.value for d in Decision],
                                    },
                                },
                            },
                        ],
                    },
                    "explanation": {
                        "type": "object",
                        "additionalProperties": {"type": "string"},
                    },
                    "taxonomy": {
                        "type": "object",
                        "additionalProperties": {"type": "string"},
                    },
                    "detection_log": {"type": "string"},
                    "detection_log_file": {
                        "oneOf": [{"type": "null"},
                                  {"type": "string",
                                   "pattern": r"^detection_log_.+\.txt$"}],
                    },
                },
            },
        },
    },
}

_MANIFEST_LOCK = threading.Lock()


@dataclass(frozen=True)
class ManifestEntry:
    design: str
    ht: str
    backend: str
    terminal: str
    n_attempts: int
    timestamp: str

    def row(self) -> str:
        return "\t".join([self.design, self.ht, self.backend, self.terminal,
                          str(self.n_attempts), self.timestamp])


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _prediction_to_dict(pred: Optional[Prediction]) -> Optional[dict]:
    if pred is None:
        return None
    return {
        "per_model": {ht.name: [clean_p, trojan_p]
                      for ht, (clean_p, trojan_p) in pred.per_model.items()},
        "triggered": sorted(ht.name for ht in pred.triggered),
        "decision": pred.decision.value,
    }


def _attempt_to_dict(attempt: Attempt, index: int) -> dict:
    return {
        "seq": index,
        "phase": attempt.phase.value,
        "index": attempt.index,
        "attack_attempt": attempt.attack_attempt,
        "variant": attempt.source_version.variant.value,
        "source": attempt.source_version.source,
        "check": {
            "ok": attempt.check.ok,
            "summary": attempt.check.summary,
            "diagnostics": [
                {"severity": d.severity.value, "code": d.code,
                 "line": d.line, "column": d.column, "message": d.message}
                for d in attempt.check.diagnostics
            ],
        },
        "outcome": attempt.outcome.value,
        "prediction": _prediction_to_dict(attempt.prediction),
        "explanation": dict(attempt.explanation),
        "taxonomy": dict(attempt.taxonomy),
        "detection_log": attempt.detection_log,
        "detection_log_file": _detection_log_name(attempt) or None,
    }


def episode_to_dict(record: EpisodeRecord) -> dict:
    return {
        "schema": EPISODE_SCHEMA_VERSION,
        "design_id": record.design_id,
        "ht_type": record.ht_type.name,
        "backend_id": record.backend_id,
        "template_version": record.template_version,
        "detector_fingerprint": record.detector_fingerprint,
        "terminal": record.terminal.value,
        "abort_reason": record.abort_reason,
        "started_at": record.started_at,
        "duration_seconds": record.duration_seconds,
        "clean_source": record.clean_source,
        "attempts": [_attempt_to_dict(a, i)
                     for i, a in enumerate(record.attempts)],
    }


def _prediction_from_dict(data: Optional[dict]) -> Optional[Prediction]:
    if data is None:
        return None
    per_model = {HtType[name]: (values[0], values[1])
                 for name, values in data["per_model"].items()}
    return Prediction(
        per_model=per_model,
        triggered=frozenset(HtType[name] for name in data["triggered"]),
        decision=Decision(data["decision"]),
    )


def _attempt_from_dict(data: dict, record: dict) -> Attempt:
    check = data["check"]
    diagnostics = [
        Diagnostic(Severity(d["severity"]), d["code"], d["line"],
                   d["column"], d["message"])
        for d in check["diagnostics"]
    ]
    return Attempt(
        phase=Phase(data["phase"]),
        index=data["index"],
        attack_attempt=data["attack_attempt"],
        source_version=SourceDesign(
            design_id=record["design_id"],
            source=data["source"],
            variant=Variant(data["variant"]),
            ht_type=HtType[record["ht_type"]],
            backend_id=record["backend_id"],
        ),
        check=CheckReport(ok=check["ok"], diagnostics=diagnostics,
                          summary=check["summary"]),
        outcome=AttemptOutcome(data["outcome"]),
        prediction=_prediction_from_dict(data["prediction"]),
        explanation=dict(data["explanation"]),
        taxonomy=dict(data["taxonomy"]),
        detection_log=data.get("detection_log", ""),
    )


def episode_from_dict(data: dict) -> EpisodeRecord:
    """Inverse of episode_to_dict."""
    if data.get("schema") != EPISODE_SCHEMA_VERSION:
        raise ValueError(
            f"unsupported episode schema: {data.get('schema')!r}")
    return EpisodeRecord(
        design_id=data["design_id"],
        ht_type=HtType[data["ht_type"]],
        backend_id=data["backend_id"],
        template_version=data["template_version"],
        detector_fingerprint=data["detector_fingerprint"],
        clean_source=data["clean_source"],
        attempts=[_attempt_from_dict(a, data) for a in data["attempts"]],
        terminal=Terminal(data["terminal"]),
        started_at=data["started_at"],
        duration_seconds=data["duration_seconds"],
        abort_reason=data["abort_reason"],
    )


def load_corpus_records(root: Path) -> List[EpisodeRecord]:
    """Every episode.json under the corpus root, in sorted path order."""
    records = []
    for path in sorted(Path(root).glob("*/*/*/episode.json")):
        records.append(episode_from_dict(
            json.loads(path.read_text(encoding="utf-8"))))
    return records


def _detection_log_name(attempt: Attempt) -> str:
    if not attempt.detection_log:
        return ""
    src = attempt.source_version
    stem = (f"{src.design_id}_{src.ht_type.name}_{src.backend_id}"
            f"_A{attempt.attack_attempt}")
    return f"detection_log_{stem}.txt"


def _timestamp(record: EpisodeRecord) -> str:
    moment = datetime.fromtimestamp(record.started_at, tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def write_corpus(record: EpisodeRecord, root: Path) -> ManifestEntry:
    """Emit every artifact of one episode; returns the manifest entry."""
    root = Path(root)
    if not root.is_dir():
        raise OSError(f"corpus root {root} is not a directory")
    cell = root / record.design_id / record.ht_type.name / record.backend_id
    cell.mkdir(parents=True, exist_ok=True)

    _atomic_write(cell / "ORI.v", record.clean_source)
    for variant, source in record.variant_sources().items():
        if variant is not Variant.ORI:
            _atomic_write(cell / f"{variant.value}.v", source)

    for i, attempt in enumerate(record.attempts):
        _atomic_write(cell / f"check_{i:02d}_{attempt.phase.value}.txt",
                      attempt.check.summary + "\n")
        if attempt.explanation:
            text = "\n".join(f"{key}: {value}" for key, value
                             in sorted(attempt.explanation.items()))
            _atomic_write(cell / f"explanation_{i:02d}.txt", text + "\n")
        if attempt.taxonomy:
            text = "\n".join(f"{key}: {value}" for key, value
                             in sorted(attempt.taxonomy.items()))
            _atomic_write(cell / f"taxonomy_{i:02d}.txt", text + "\n")
        if attempt.detection_log:
            _atomic_write(cell / _detection_log_name(attempt),
                          attempt.detection_log)

    _atomic_write(cell / "episode.json",
                  json.dumps(episode_to_dict(record), indent=2,
                             sort_keys=True) + "\n")

    entry = ManifestEntry(
        design=record.design_id,
        ht=record.ht_type.name,
        backend=record.backend_id,
        terminal=record.terminal.value,
        n_attempts=record.n_attack_attempts(),
        timestamp=_timestamp(record),
    )
    _append_manifest(root / "manifest.tsv", entry)
    return entry


def _append_manifest(path: Path, entry: ManifestEntry) -> None:
    with _MANIFEST_LOCK:
        header = "\t".join(MANIFEST_FIELDS)
        lines: List[str] = []
        if path.exists():
            lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            lines = [header]
        row = entry.row()
        if row in lines[1:]:
            return
        lines.append(row)
        _atomic_write(path, "\n".join(lines) + "\n")


def read_manifest(root: Path) -> List[ManifestEntry]:
    path = Path(root) / "manifest.tsv"
    if not path.exists():
        return []
    lines = path.read_text(encoding="utf-8").splitlines()
    entries = []
    for line in lines[1:]:
        parts = line.split("\t")
        if len(parts) != len(MANIFEST_FIELDS):
            raise ValueError(f"malformed manifest row: {line!r}")
        entries.append(ManifestEntry(
            design=parts[0], ht=parts[1], backend=parts[2], terminal=parts[3],
            n_attempts=int(parts[4]), timestamp=parts[5]))
    return entries
