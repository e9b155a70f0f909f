"""Command-line entry point: every pipeline stage as a subcommand.

Exit codes follow a small contract so runs can be scripted:

* 0 — success (for ``check``/``detect``: nothing found)
* 1 — usage error (bad flags/arguments)
* 2 — I/O or configuration error
* 3 — findings (``detect``: Trojan detected; ``check``: syntax errors)
* 4 — backend failure during a gym run

Every error path prints exactly one ``trojangym: error: ...`` line to
stderr. ``TROJANGYM_LOG`` sets the logging level (e.g. DEBUG, INFO).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .agents import AgentError, BackendKind
from .analysis import (EmptyCorpusError, aggregate_metrics, curves_csv,
                       similarity_csv, similarity_matrix, summary_text)
from .config import ConfigError, RunConfig, load_config
from .core import HtType, SourceDesign
from .detector.ensemble import Decision, TrojanEnsemble
from .detector.gcn import TrainConfig, accuracy, stratified_split, train
from .detector.model_io import (ModelFormatError, load_ensemble, save_model,
                                save_ensemble)
from .dfg import adjacency_csv, build_dfg, serialize_dfg, stats_line
from .orchestrator import (EpisodeRecord, LogFiles, Terminal,
                           format_detection_log, load_corpus_records,
                           run_episode, write_corpus)
from .synth import SynthConfig
from .synth import write_corpus as write_synth_corpus
from .verilog import parse_source, syntax_check

log = logging.getLogger("trojangym")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FOUND = 3
EXIT_BACKEND = 4

#: AgentError codes that mean the language-model backend itself failed.
_BACKEND_ERROR_CODES = ("E_AUTH", "E_HTTP", "E_TIMEOUT", "E_RATE_LIMIT",
                        "E_FIXTURE", "E_BACKEND")


class _UsageExit(Exception):
    def __init__(self, message: str):
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit 1, not 2."""

    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageExit(message)


def _fail(category: str, message: str) -> None:
    sys.stderr.write(f"trojangym: error: {category}: {message}\n")


def _read_source(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as err:
        raise OSError(f"cannot read {path}: {err}")


# ---------------------------------------------------------------------------
# check / dfg


def cmd_check(args) -> int:
    source = _read_source(Path(args.file))
    report = syntax_check(source)
    print(report.summary)
    return EXIT_OK if report.ok else EXIT_FOUND


def cmd_dfg(args) -> int:
    path = Path(args.file)
    source = _read_source(path)
    report = syntax_check(source)
    if not report.ok:
        _fail("io", f"{path}: {report.summary}")
        return EXIT_IO
    dfg = build_dfg(parse_source(source).ast)
    print(stats_line(str(path), dfg))
    if args.csv:
        Path(args.csv).write_text(adjacency_csv(dfg), encoding="utf-8")
    if args.json:
        Path(args.json).write_text(serialize_dfg(dfg), encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


def _load_graph_dir(directory: Path):
    if not directory.is_dir():
        raise OSError(f"missing corpus directory {directory}")
    graphs = []
    for path in sorted(directory.glob("*.v")):
        source = path.read_text(encoding="utf-8")
        report = syntax_check(source)
        if not report.ok:
            raise OSError(f"{path}: {report.summary}")
        graphs.append(build_dfg(parse_source(source).ast))
    if not graphs:
        raise OSError(f"no .v files under {directory}")
    return graphs


def _train_one(corpus: Path, ht: HtType, cfg: TrainConfig):
    clean = _load_graph_dir(corpus / "clean")
    infected = _load_graph_dir(corpus / ht.name)
    model = train(clean, infected, ht, cfg)
    graphs = list(clean) + list(infected)
    labels = [0] * len(clean) + [1] * len(infected)
    _, val_idx = stratified_split(labels, cfg.val_fraction, cfg.seed)
    val_acc = accuracy(model, [graphs[i] for i in val_idx],
                       [labels[i] for i in val_idx])
    return model, val_acc


def cmd_train(args) -> int:
    corpus = Path(args.corpus)
    out = Path(args.out)
    cfg = TrainConfig(seed=args.seed)
    targets = [HtType[args.ht]] if args.ht else list(HtType)
    out.mkdir(parents=True, exist_ok=True)
    models = {}
    for ht in targets:
        model, val_acc = _train_one(corpus, ht, cfg)
        models[ht] = model
        print(f"{ht.name}: epochs={model.training_meta.epochs} "
              f"val_acc={val_acc:.2f}")
    if args.ht:
        save_model(models[targets[0]], out / f"{targets[0].name}.model")
    else:
        save_ensemble(out, TrojanEnsemble(models=models,
                                          threshold=args.threshold))
    print(f"saved {len(models)} model(s) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# detect


def cmd_detect(args) -> int:
    path = Path(args.file)
    source = _read_source(path)
    report = syntax_check(source)
    if not report.ok:
        _fail("io", f"{path}: {report.summary}")
        return EXIT_IO
    ens = load_ensemble(args.models)
    if args.threshold is not None:
        ens = TrojanEnsemble(models=ens.models, threshold=args.threshold)
    dfg = build_dfg(parse_source(source).ast)
    prediction = ens.predict_with_budget(dfg, args.budget)
    if prediction is None:
        _fail("io", f"detector timed out after {args.budget}s")
        return EXIT_IO
    files = LogFiles(test_file=str(path),
                     log_file=f"detection_log_{path.stem}.txt")
    sys.stdout.write(format_detection_log(files, dfg.meta, prediction))
    return EXIT_FOUND if prediction.decision is Decision.TROJAN else EXIT_OK


# ---------------------------------------------------------------------------
# gym


def _check_remote_auth(config: RunConfig) -> Optional[str]:
    for backend in config.backends:
        if backend.kind is BackendKind.REMOTE:
            name = backend.auth_env_var
            if not name or not os.environ.get(name):
                return (f"backend {backend.backend_id!r} needs the "
                        f"{name or '(unset)'} environment variable")
    return None


def _run_cell(config: RunConfig, ens, design, ht: HtType,
              backend) -> EpisodeRecord:
    source = design.path.read_text(encoding="utf-8")
    clean = SourceDesign(design_id=design.design_id, source=source)
    return run_episode(clean, ht, backend, ens, config.limits,
                       detector_timeout=config.detector.timeout_seconds,
                       template_dir=config.template_dir)


def _gym_summary(records: Sequence[EpisodeRecord]) -> str:
    counts = {t: 0 for t in Terminal}
    for record in records:
        counts[record.terminal] += 1
    lines = [f"episodes={len(records)}"]
    lines += [f"{t.value}={counts[t]}" for t in Terminal]
    survivors = [r for r in records if r.terminal is not Terminal.ABORTED]
    if survivors:
        lines.append("")
        lines.append(summary_text(aggregate_metrics(survivors)).rstrip("\n"))
    return "\n".join(lines) + "\n"


def cmd_gym(args) -> int:
    config = load_config(args.config)
    missing = _check_remote_auth(config)
    if missing is not None:
        _fail("config", missing)
        return EXIT_IO
    for design in config.designs:
        if not design.path.is_file():
            _fail("config", f"design file not found: {design.path}")
            return EXIT_IO
    ens = load_ensemble(config.detector.model_dir)
    if config.detector.threshold != ens.threshold:
        ens = TrojanEnsemble(models=ens.models,
                             threshold=config.detector.threshold)
    config.corpus_root.mkdir(parents=True, exist_ok=True)
    cells = [(design, ht, backend)
             for design in config.designs
             for ht in config.ht_types
             for backend in config.backends]
    records: List[EpisodeRecord] = []
    try:
        if config.workers == 1:
            for design, ht, backend in cells:
                records.append(_run_cell(config, ens, design, ht, backend))
        else:
            pool = concurrent.futures.ThreadPoolExecutor(
                max_workers=config.workers)
            with pool:
                futures = [
                    pool.submit(_run_cell, config, ens, design, ht, backend)
                    for design, ht, backend in cells]
                records = [f.result() for f in futures]
    except ValueError as err:
        # a baseline design failed its own gate (see run_episode pre)
        _fail("config", str(err))
        return EXIT_IO
    for record in records:
        write_corpus(record, config.corpus_root)
    text = _gym_summary(records)
    (config.corpus_root / "run_summary.txt").write_text(text,
                                                        encoding="utf-8")
    sys.stdout.write(text)
    backend_failures = [
        r for r in records
        if r.terminal is Terminal.ABORTED
        and r.abort_reason.startswith(_BACKEND_ERROR_CODES)
    ]
    if backend_failures:
        sample = backend_failures[0]
        _fail("backend", f"{len(backend_failures)} episode(s) aborted "
                         f"(first: {sample.abort_reason})")
        return EXIT_BACKEND
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _analyze_similarity(records: Sequence[EpisodeRecord], out: Path) -> int:
    written = 0
    for record in records:
        variants = {}
        for variant, source in record.variant_sources().items():
            variants[variant] = build_dfg(parse_source(source).ast)
        context = (record.backend_id, record.design_id, record.ht_type.name)
        matrix = similarity_matrix(variants, context)
        name = (f"similarity_{record.backend_id}_{record.design_id}"
                f"_{record.ht_type.name}.csv")
        (out / name).write_text(similarity_csv(matrix), encoding="utf-8")
        written += 1
    print(f"wrote {written} similarity matrices to {out}")
    return EXIT_OK


def _analyze_metrics(records: Sequence[EpisodeRecord], out: Path) -> int:
    metrics = aggregate_metrics(records)
    (out / "curves.csv").write_text(curves_csv(metrics), encoding="utf-8")
    text = summary_text(metrics)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    root = Path(args.corpus_root)
    if not root.is_dir():
        _fail("io", f"corpus root not found: {root}")
        return EXIT_IO
    records = load_corpus_records(root)
    if not records:
        _fail("io", f"no episodes under {root}")
        return EXIT_IO
    out = Path(args.out) if args.out else root
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "similarity":
        return _analyze_similarity(records, out)
    try:
        return _analyze_metrics(records, out)
    except EmptyCorpusError as err:
        _fail("io", str(err))
        return EXIT_IO


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    cfg = SynthConfig(n_clean=args.n_clean, n_per_ht=args.n_per_ht,
                      seed=args.seed)
    count = write_synth_corpus(cfg, Path(args.out))
    print(f"wrote {count} designs to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="trojangym",
                     description="Detector-in-the-loop hardware-Trojan gym.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("check", help="syntax-check a Verilog file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dfg", help="extract a data-flow graph")
    p.add_argument("file")
    p.add_argument("--csv", help="write adjacency CSV here")
    p.add_argument("--json", help="write serialized graph JSON here")
    p.set_defaults(func=cmd_dfg)

    p = sub.add_parser("train", help="train per-HT detector models")
    p.add_argument("--corpus", required=True,
                   help="directory with clean/ and HT1..HT4/ .v files")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--ht", choices=[ht.name for ht in HtType],
                   help="train a single HT model (default: all four)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5,
                   help="ensemble decision threshold to store")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="run the ensemble on one design")
    p.add_argument("file")
    p.add_argument("--models", required=True, help="model directory")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--budget", type=float, default=60.0,
                   help="per-graph detector budget in seconds")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gym", help="run insertion episodes from a config")
    p.add_argument("--config", required=True, help="JSON run config")
    p.set_defaults(func=cmd_gym)

    p = sub.add_parser("analyze", help="post-hoc corpus analysis")
    p.add_argument("kind", choices=["similarity", "metrics"])
    p.add_argument("corpus_root")
    p.add_argument("--out", help="output directory (default: corpus root)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="emit the synthetic training corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-clean", type=int, default=50)
    p.add_argument("--n-per-ht", type=int, default=50)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("TROJANGYM_LOG", "WARNING").upper()
    if level not in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
        level = "WARNING"
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as err:
        _fail("usage", str(err))
        return EXIT_USAGE
    except SystemExit as err:
        # argparse exits on --help and version; pass its code through,
        # normalizing its usage-error code to ours.
        code = err.code or 0
        return EXIT_USAGE if code == 2 else int(code)
    if not getattr(args, "command", None):
        _fail("usage", "a subcommand is required (see --help)")
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageExit as err:
        _fail("usage", str(err))
        return EXIT_USAGE
    except ConfigError as err:
        _fail("config", str(err))
        return EXIT_IO
    except ModelFormatError as err:
        _fail("io", str(err))
        return EXIT_IO
    except AgentError as err:
        _fail("backend", f"{err.code}: {err}")
        return EXIT_BACKEND
    except OSError as err:
        _fail("io", str(err))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
