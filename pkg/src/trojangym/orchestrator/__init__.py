"""Episode state machine, detection-log rendering, corpus emission."""

from .corpus import (
    EPISODE_JSON_SCHEMA,
    EPISODE_SCHEMA_VERSION,
    MANIFEST_FIELDS,
    ManifestEntry,
    episode_from_dict,
    episode_to_dict,
    load_corpus_records,
    read_manifest,
    write_corpus,
)
from .detection_log import LogFiles, format_detection_log
from .episode import (
    Attempt,
    AttemptOutcome,
    EpisodeLimits,
    EpisodeRecord,
    MAX_VARIANTS,
    Phase,
    ScriptedDetector,
    Terminal,
    run_episode,
)

__all__ = [
    "Attempt",
    "AttemptOutcome",
    "EPISODE_JSON_SCHEMA",
    "EPISODE_SCHEMA_VERSION",
    "EpisodeLimits",
    "EpisodeRecord",
    "LogFiles",
    "MANIFEST_FIELDS",
    "MAX_VARIANTS",
    "ManifestEntry",
    "Phase",
    "ScriptedDetector",
    "Terminal",
    "episode_from_dict",
    "episode_to_dict",
    "format_detection_log",
    "load_corpus_records",
    "read_manifest",
    "run_episode",
    "write_corpus",
]
