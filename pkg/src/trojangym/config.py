"""Run configuration: one committable JSON file, secrets via env vars only.

The config file names, for each remote backend, the *environment variable*
that holds its API key. Raw credentials are rejected wherever they appear in
the file so that a config can be committed and shared without leaking keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .agents import BackendConfig, BackendKind
from .core import HtType
from .orchestrator.episode import EpisodeLimits


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


#: Keys that would smuggle a credential into the config file. The config
#: carries env-var *names*; the variables themselves hold the secrets.
FORBIDDEN_SECRET_KEYS = ("api_key", "apikey", "token", "secret", "password")


@dataclass(frozen=True)
class DetectorConfig:
    model_dir: Path
    threshold: float = 0.5
    timeout_seconds: float = 60.0

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise ConfigError(
                f"detector.threshold must be in (0, 1), got {self.threshold}")
        if self.timeout_seconds <= 0:
            raise ConfigError("detector.timeout_seconds must be positive")


@dataclass(frozen=True)
class DesignEntry:
    design_id: str
    path: Path


@dataclass(frozen=True)
class RunConfig:
    corpus_root: Path
    backends: Tuple[BackendConfig, ...]
    detector: DetectorConfig
    designs: Tuple[DesignEntry, ...]
    ht_types: Tuple[HtType, ...] = tuple(HtType)
    limits: EpisodeLimits = field(default_factory=EpisodeLimits)
    workers: int = 1
    seed: int = 0
    template_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.backends:
            raise ConfigError("at least one backend is required")
        if not self.designs:
            raise ConfigError("at least one design is required")
        ids = [b.backend_id for b in self.backends]
        if len(set(ids)) != len(ids):
            raise ConfigError("backend_id values must be unique")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return data[key]


def _scan_for_secrets(data: dict, context: str) -> None:
    for key in data:
        if key.lower() in FORBIDDEN_SECRET_KEYS:
            raise ConfigError(
                f"{context}: refusing key {key!r} — configs hold env-var "
                "names (auth_env_var), never credentials")


def _backend_from_dict(data: dict, base: Path) -> BackendConfig:
    context = f"backend {data.get('backend_id', '?')!r}"
    _scan_for_secrets(data, context)
    kind_name = str(_require(data, "kind", context)).upper()
    try:
        kind = BackendKind[kind_name]
    except KeyError:
        raise ConfigError(
            f"{context}: unknown kind {data['kind']!r} "
            f"(expected one of {[k.name.lower() for k in BackendKind]})")
    kwargs = {
        "backend_id": str(_require(data, "backend_id", context)),
        "kind": kind,
    }
    if kind is BackendKind.MOCK:
        fixture = _require(data, "fixture_path", context)
        kwargs["fixture_path"] = _resolve(base, fixture)
    else:
        kwargs["endpoint_url"] = str(_require(data, "endpoint_url", context))
        kwargs["model_name"] = str(_require(data, "model_name", context))
        kwargs["auth_env_var"] = str(_require(data, "auth_env_var", context))
    for opt in ("max_tokens", "temperature", "timeout_seconds",
                "requests_per_minute"):
        if opt in data:
            kwargs[opt] = data[opt]
    known = set(kwargs) | {"fixture_path", "endpoint_url", "model_name",
                           "auth_env_var"}
    unknown = set(data) - known - {"kind"}
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    try:
        return BackendConfig(**kwargs)
    except ValueError as err:
        raise ConfigError(f"{context}: {err}")


def _resolve(base: Path, value) -> Path:
    path = Path(str(value))
    return path if path.is_absolute() else base / path


def config_from_dict(data: dict, base: Path = Path(".")) -> RunConfig:
    """Build a RunConfig from parsed JSON; relative paths resolve against
    ``base`` (normally the config file's directory)."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _scan_for_secrets(data, "config")
    det_data = _require(data, "detector", "config")
    _scan_for_secrets(det_data, "detector")
    detector = DetectorConfig(
        model_dir=_resolve(base, _require(det_data, "model_dir", "detector")),
        threshold=float(det_data.get("threshold", 0.5)),
        timeout_seconds=float(det_data.get("timeout_seconds", 60.0)),
    )
    limits_data = data.get("limits", {})
    limits = EpisodeLimits(
        max_repairs=int(limits_data.get("max_repairs", 4)),
        max_refines=int(limits_data.get("max_refines", 4)),
    )
    if limits.max_repairs < 0 or limits.max_refines < 0:
        raise ConfigError("limits must be non-negative")
    designs = []
    for entry in _require(data, "designs", "config"):
        designs.append(DesignEntry(
            design_id=str(_require(entry, "id", "design entry")),
            path=_resolve(base, _require(entry, "path", "design entry")),
        ))
    ht_types: Tuple[HtType, ...]
    if "ht_types" in data:
        try:
            ht_types = tuple(HtType[name] for name in data["ht_types"])
        except KeyError as err:
            raise ConfigError(f"unknown ht type {err.args[0]!r}")
        if not ht_types:
            raise ConfigError("ht_types must not be empty when given")
    else:
        ht_types = tuple(HtType)
    backends = tuple(_backend_from_dict(b, base)
                     for b in _require(data, "backends", "config"))
    template_dir = (_resolve(base, data["template_dir"])
                    if data.get("template_dir") else None)
    return RunConfig(
        corpus_root=_resolve(base, _require(data, "corpus_root", "config")),
        backends=backends,
        detector=detector,
        designs=tuple(designs),
        ht_types=ht_types,
        limits=limits,
        workers=int(data.get("workers", 1)),
        seed=int(data.get("seed", 0)),
        template_dir=template_dir,
    )


def load_config(path) -> RunConfig:
    """Parse a JSON run config from disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}")
    return config_from_dict(data, base=path.parent)


__all__ = [
    "ConfigError",
    "DesignEntry",
    "DetectorConfig",
    "FORBIDDEN_SECRET_KEYS",
    "RunConfig",
    "config_from_dict",
    "load_config",
]
