"""The attack–defense episode state machine.

One episode = one (clean design, Trojan type, backend) run:

    initial generation -> compile/repair gate (<=4 repairs)
        -> detection -> adversarial refinement rounds, each re-traversing
           the gate with a fresh repair budget -> terminal state.

Attack attempts are numbered k = 1 (initial insertion), 2.. (refinement
rounds); attempt k mints variant ``Ak`` when it compiles, so an episode
spans at most the A1..A4 variant namespace — Table-style outcome rows map
1:1 onto attempt indexes, and a syntax-dead attempt leaves its variant
absent. Backend failures and detector timeouts abort the episode with an
explicit ABORTED terminal so operational faults never pollute evasion
statistics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from ..agents import (
    AgentError,
    BackendConfig,
    ConversationState,
    FormatError,
    PromptKind,
    parse_response,
    query,
    render_prompt,
    template_version,
)
from ..core import HtType, SourceDesign, Variant
from ..detector.ensemble import Decision, Prediction
from ..dfg import build_dfg
from ..verilog import (
    CheckReport,
    Diagnostic,
    E_FORMAT,
    Severity,
    interface_diagnostics,
    parse_for_top,
    parse_source,
    port_signature,
    syntax_check,
)
from ..dfg.graph import graph_stats
from .detection_log import LogFiles, format_detection_log

__all__ = [
    "Phase",
    "AttemptOutcome",
    "Terminal",
    "EpisodeLimits",
    "Attempt",
    "EpisodeRecord",
    "ScriptedDetector",
    "run_episode",
    "MAX_VARIANTS",
]

#: A1..A4 — the variant namespace bounds attack attempts per episode.
MAX_VARIANTS = 4


class Phase(Enum):
    GENERATE = "GENERATE"
    REPAIR = "REPAIR"
    REFINE = "REFINE"


class AttemptOutcome(Enum):
    SYNTAX_FAIL = "SYNTAX_FAIL"
    DETECTED = "DETECTED"
    EVADED = "EVADED"
    TIMEOUT = "TIMEOUT"


class Terminal(Enum):
    EVADED = "EVADED"
    NON_STEALTHY = "NON_STEALTHY"
    SYNTAX_DISCARD = "SYNTAX_DISCARD"
    ABORTED = "ABORTED"


@dataclass(frozen=True)
class EpisodeLimits:
    max_repairs: int = 4
    max_refines: int = 4


@dataclass
class Attempt:
    phase: Phase
    index: int
    attack_attempt: int
    source_version: SourceDesign
    check: CheckReport
    outcome: AttemptOutcome
    prediction: Optional[Prediction] = None
    explanation: Dict[str, str] = field(default_factory=dict)
    taxonomy: Dict[str, str] = field(default_factory=dict)
    detection_log: str = ""


@dataclass
class EpisodeRecord:
    design_id: str
    ht_type: HtType
    backend_id: str
    template_version: str
    detector_fingerprint: str
    clean_source: str
    attempts: List[Attempt]
    terminal: Terminal
    started_at: float
    duration_seconds: float
    abort_reason: str = ""

    def n_attack_attempts(self) -> int:
        return max((a.attack_attempt for a in self.attempts), default=0)

    def variant_sources(self) -> Dict[Variant, str]:
        """ORI plus every minted (compiled) variant, in lineage order."""
        out = {Variant.ORI: self.clean_source}
        for attempt in self.attempts:
            if attempt.check.ok:
                out[Variant(f"A{attempt.attack_attempt}")] = (
                    attempt.source_version.source)
        return out

    def compiled_attempts(self) -> List[Attempt]:
        return [a for a in self.attempts if a.check.ok]


class ScriptedDetector:
    """Detector stub replaying a fixed verdict sequence.

    Satisfies the same two-method protocol as the trained ensemble
    (``predict_with_budget``, ``fingerprint``), which keeps episode tests
    hermetic and instant. ``script`` entries are Prediction objects or
    None (None = simulated timeout).
    """

    def __init__(self, script: List[Optional[Prediction]],
                 fingerprint: str = "scripted00000"):
        self.script = list(script)
        self.calls = 0
        self._fingerprint = fingerprint

    def predict_with_budget(self, dfg, budget_seconds: float = 60.0):
        if self.calls >= len(self.script):
            raise AssertionError("scripted detector exhausted")
        verdict = self.script[self.calls]
        self.calls += 1
        return verdict

    def fingerprint(self) -> str:
        return self._fingerprint


def _format_failure_report(error: FormatError) -> CheckReport:
    diag = Diagnostic(Severity.ERROR, E_FORMAT, 0, 0, str(error))
    return CheckReport.from_diagnostics([diag])


def run_episode(clean: SourceDesign, ht: HtType, backend: BackendConfig,
                ens, limits: EpisodeLimits = EpisodeLimits(), *,
                detector_timeout: float = 60.0,
                template_dir=None) -> EpisodeRecord:
    """Run one full episode; every intermediate source version is retained.

    ``ens`` is anything with ``predict_with_budget(dfg, budget) ->
    Prediction | None`` and ``fingerprint() -> str``; the trained
    TrojanEnsemble and the ScriptedDetector both qualify.
    """
    baseline_check = syntax_check(clean.source)
    if not baseline_check.ok:
        raise ValueError(
            f"baseline '{clean.design_id}' fails syntax check:\n"
            f"{baseline_check.summary}")
    expected_sig = port_signature(parse_for_top(clean.source))

    session = ConversationState()
    attempts: List[Attempt] = []
    started_at = time.time()
    t0 = time.perf_counter()

    def finish(terminal: Terminal, reason: str = "") -> EpisodeRecord:
        return EpisodeRecord(
            design_id=clean.design_id,
            ht_type=ht,
            backend_id=backend.backend_id,
            template_version=template_version(template_dir),
            detector_fingerprint=ens.fingerprint(),
            clean_source=clean.source,
            attempts=attempts,
            terminal=terminal,
            started_at=started_at,
            duration_seconds=time.perf_counter() - t0,
            abort_reason=reason,
        )

    def analyze(raw: str):
        """Format gate, syntax gate, interface-preservation gate."""
        try:
            resp = parse_response(raw)
        except FormatError as err:
            return raw or "(empty response)", _format_failure_report(err), None
        report = syntax_check(resp.code)
        if report.ok:
            diags = interface_diagnostics(expected_sig,
                                          parse_for_top(resp.code))
            if diags:
                report = CheckReport.from_diagnostics(diags)
        return resp.code, report, resp

    def run_gate(first_raw: str, k: int) -> Optional[str]:
        """Compile/repair loop for attack attempt k; returns compiled code."""
        raw = first_raw
        for repair_round in range(limits.max_repairs + 1):
            code, report, resp = analyze(raw)
            if repair_round == 0:
                phase = Phase.GENERATE if k == 1 else Phase.REFINE
                index = k if k == 1 else k - 1
            else:
                phase, index = Phase.REPAIR, repair_round
            attempts.append(Attempt(
                phase=phase,
                index=index,
                attack_attempt=k,
                source_version=SourceDesign(
                    design_id=clean.design_id, source=code,
                    variant=Variant(f"A{k}"), ht_type=ht,
                    backend_id=backend.backend_id),
                check=report,
                outcome=AttemptOutcome.SYNTAX_FAIL,
                explanation=dict(resp.explanation) if resp else {},
                taxonomy=dict(resp.taxonomy) if resp else {},
            ))
            if report.ok:
                return code
            if repair_round == limits.max_repairs:
                return None
            prompt = render_prompt(PromptKind.REPAIR, {
                "diagnostics": report.summary,
                "faulty_code": code,
            }, template_dir)
            raw = query(backend, prompt, session, PromptKind.REPAIR)
        return None  # pragma: no cover - loop always returns

    def detect(code: str, k: int) -> Optional[Prediction]:
        """Run the ensemble on attempt k's graph; annotate the gate row."""
        dfg = build_dfg(parse_source(code).ast)
        prediction = ens.predict_with_budget(dfg, detector_timeout)
        row = attempts[-1]
        if prediction is None:
            row.outcome = AttemptOutcome.TIMEOUT
            return None
        row.prediction = prediction
        if prediction.decision is Decision.CLEAN:
            row.outcome = AttemptOutcome.EVADED
        else:
            row.outcome = AttemptOutcome.DETECTED
        cell = f"{clean.design_id}/{ht.name}/{backend.backend_id}"
        stem = f"{clean.design_id}_{ht.name}_{backend.backend_id}_A{k}"
        row.detection_log = format_detection_log(
            LogFiles(test_file=f"{cell}/A{k}.v",
                     log_file=f"{cell}/detection_log_{stem}.txt"),
            graph_stats(dfg), prediction)
        return prediction

    max_attempt = min(MAX_VARIANTS, 1 + limits.max_refines)
    try:
        prompt = render_prompt(PromptKind.INITIAL, {
            "ht": ht, "clean_source": clean.source}, template_dir)
        raw = query(backend, prompt, session, PromptKind.INITIAL)

        code = run_gate(raw, k=1)
        if code is None:
            return finish(Terminal.SYNTAX_DISCARD)
        prediction = detect(code, 1)
        if prediction is None:
            return finish(Terminal.ABORTED, "detector timeout")
        if prediction.decision is Decision.CLEAN:
            return finish(Terminal.EVADED)

        detected_code = code
        detection_log = attempts[-1].detection_log
        last_round_dead = False
        for k in range(2, max_attempt + 1):
            prompt = render_prompt(PromptKind.EVASION, {
                "ht": ht,
                "clean_source": clean.source,
                "detected_code": detected_code,
                "attempt_number": k - 1,
                "detection_log": detection_log,
            }, template_dir)
            raw = query(backend, prompt, session, PromptKind.EVASION)
            code = run_gate(raw, k)
            if code is None:
                last_round_dead = True
                continue
            last_round_dead = False
            prediction = detect(code, k)
            if prediction is None:
                return finish(Terminal.ABORTED, "detector timeout")
            if prediction.decision is Decision.CLEAN:
                return finish(Terminal.EVADED)
            detected_code = code
            detection_log = attempts[-1].detection_log

        if last_round_dead:
            return finish(Terminal.SYNTAX_DISCARD)
        return finish(Terminal.NON_STEALTHY)
    except AgentError as err:
        return finish(Terminal.ABORTED, f"{err.code}: {err}")
