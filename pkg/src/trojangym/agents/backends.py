"""Agent backends: remote chat-completion services and a scripted mock.

One wire dialect (system/user/assistant JSON messages, bearer auth) covers
every remote vendor; the mock replays fixture files keyed by prompt kind
and per-kind turn index, which makes end-to-end episodes hermetic and
byte-deterministic. Credentials live only in environment variables named
by the config — configs, logs, and episode records never see the secret.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import requests

from .prompts import PromptKind

__all__ = [
    "BackendKind",
    "BackendConfig",
    "ConversationState",
    "AgentError",
    "AuthError",
    "BackendTimeoutError",
    "HttpError",
    "RateLimitError",
    "MockFixtureError",
    "SYSTEM_PROMPT",
    "query",
    "redact",
    "load_fixture",
]

SYSTEM_PROMPT = "You are an expert skilled in hardware design and verification."

MAX_RETRIES = 3
_BACKOFF_CAP_SECONDS = 8.0


class BackendKind(Enum):
    REMOTE = "REMOTE"
    MOCK = "MOCK"


@dataclass(frozen=True)
class BackendConfig:
    """How to reach one agent. ``auth_env_var`` names the variable holding

    the credential; the credential itself is never stored here or on disk.
    """

    backend_id: str
    kind: BackendKind = BackendKind.REMOTE
    endpoint_url: str = ""
    model_name: str = ""
    auth_env_var: str = ""
    max_tokens: int = 4096
    temperature: float = 0.2
    timeout_seconds: float = 120.0
    requests_per_minute: float = 60.0
    fixture_path: str = ""

    def __post_init__(self):
        if not self.backend_id:
            raise ValueError("backend_id must be non-empty")
        if self.kind is BackendKind.REMOTE:
            if not self.endpoint_url or not self.model_name:
                raise ValueError(
                    "REMOTE backend requires endpoint_url and model_name")
        elif not self.fixture_path:
            raise ValueError("MOCK backend requires fixture_path")


@dataclass
class ConversationState:
    """Per-episode dialogue. Confined to a single episode worker."""

    messages: List[Dict[str, str]] = field(default_factory=list)
    turns: Dict[PromptKind, int] = field(default_factory=dict)
    retries: List[str] = field(default_factory=list)

    def append(self, role: str, content: str) -> None:
        self.messages.append({"role": role, "content": content})


class AgentError(RuntimeError):
    """Base for backend failures; ``code`` is the stable diagnostic name."""

    code = "E_BACKEND"


class AuthError(AgentError):
    code = "E_AUTH"


class BackendTimeoutError(AgentError):
    code = "E_TIMEOUT"


class HttpError(AgentError):
    code = "E_HTTP"

    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"HTTP {status}")
        self.status = status


class RateLimitError(AgentError):
    code = "E_RATE_LIMIT"


class MockFixtureError(AgentError):
    code = "E_FIXTURE"


def redact(text: str, secrets: Iterable[str]) -> str:
    """Blank out every secret value before text is logged or persisted."""
    for secret in secrets:
        if secret:
            text = text.replace(secret, "[REDACTED]")
    return text


# --- global per-endpoint rate limiting (token bucket) ---

class _TokenBucket:
    def __init__(self, per_minute: float):
        self.capacity = max(1.0, per_minute / 6.0)  # allow short bursts
        self.rate = per_minute / 60.0
        self.tokens = self.capacity
        self.stamp = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity,
                                  self.tokens + (now - self.stamp) * self.rate)
                self.stamp = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


_BUCKETS: Dict[str, _TokenBucket] = {}
_BUCKETS_LOCK = threading.Lock()


def _limiter(cfg: BackendConfig) -> _TokenBucket:
    with _BUCKETS_LOCK:
        bucket = _BUCKETS.get(cfg.endpoint_url)
        if bucket is None:
            bucket = _TokenBucket(cfg.requests_per_minute)
            _BUCKETS[cfg.endpoint_url] = bucket
        return bucket


# --- mock fixtures ---

_FIXTURE_CACHE: Dict[Tuple[str, float], Dict[Tuple[PromptKind, int], str]] = {}


def load_fixture(path: Path) -> Dict[Tuple[PromptKind, int], str]:
    """Parse a multi-turn fixture: blocks opened by ``=== KIND index``."""
    path = Path(path)
    key = (str(path), path.stat().st_mtime)
    cached = _FIXTURE_CACHE.get(key)
    if cached is not None:
        return cached

    turns: Dict[Tuple[PromptKind, int], str] = {}
    current: Optional[Tuple[PromptKind, int]] = None
    lines: List[str] = []

    def close() -> None:
        if current is not None:
            turns[current] = "\n".join(lines).strip("\n")

    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("=== "):
            close()
            parts = line.split()
            if len(parts) != 3:
                raise MockFixtureError(f"bad fixture delimiter: {line!r}")
            try:
                kind = PromptKind[parts[1]]
                index = int(parts[2])
            except (KeyError, ValueError) as exc:
                raise MockFixtureError(
                    f"bad fixture delimiter: {line!r}") from exc
            current = (kind, index)
            lines = []
        elif current is not None:
            lines.append(line)
    close()
    _FIXTURE_CACHE[key] = turns
    return turns


def _query_mock(cfg: BackendConfig, prompt: str,
                session: ConversationState, kind: PromptKind) -> str:
    turns = load_fixture(Path(cfg.fixture_path))
    index = session.turns.get(kind, 0)
    reply = turns.get((kind, index))
    if reply is None:
        raise MockFixtureError(
            f"fixture {cfg.fixture_path} has no response for "
            f"({kind.name}, {index})")
    session.turns[kind] = index + 1
    session.append("user", prompt)
    session.append("assistant", reply)
    return reply


# --- remote chat completion ---

def _retry_after_seconds(response: "requests.Response", attempt: int) -> float:
    header = response.headers.get("Retry-After")
    if header is not None:
        try:
            return max(0.0, float(header))
        except ValueError:
            pass
    return min(_BACKOFF_CAP_SECONDS, 0.5 * (2.0 ** attempt))


def _query_remote(cfg: BackendConfig, prompt: str,
                  session: ConversationState, kind: PromptKind) -> str:
    if not cfg.auth_env_var:
        raise AuthError(f"backend '{cfg.backend_id}' names no auth env var")
    secret = os.environ.get(cfg.auth_env_var, "")
    if not secret:
        raise AuthError(
            f"environment variable '{cfg.auth_env_var}' is unset or empty")

    payload = {
        "model": cfg.model_name,
        "messages": ([{"role": "system", "content": SYSTEM_PROMPT}]
                     + session.messages
                     + [{"role": "user", "content": prompt}]),
        "max_tokens": cfg.max_tokens,
        "temperature": cfg.temperature,
    }
    headers = {"Authorization": f"Bearer {secret}"}
    limiter = _limiter(cfg)

    attempt = 0
    while True:
        limiter.acquire()
        try:
            response = requests.post(cfg.endpoint_url, json=payload,
                                     headers=headers,
                                     timeout=cfg.timeout_seconds)
        except requests.Timeout as exc:
            raise BackendTimeoutError(
                f"no response within {cfg.timeout_seconds}s") from exc
        except requests.RequestException as exc:
            raise HttpError(0, f"transport failure: {exc}") from exc

        if response.status_code == 429:
            if attempt >= MAX_RETRIES:
                raise RateLimitError(
                    f"still rate-limited after {MAX_RETRIES} retries")
            wait = _retry_after_seconds(response, attempt)
            session.retries.append(
                f"{kind.name}: HTTP 429, retry {attempt + 1} in {wait:.2f}s")
            time.sleep(wait)
            attempt += 1
            continue
        if response.status_code in (401, 403):
            raise AuthError(f"credential rejected (HTTP {response.status_code})")
        if not 200 <= response.status_code < 300:
            raise HttpError(response.status_code)

        try:
            reply = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise HttpError(response.status_code,
                            "malformed chat-completion response") from exc

        session.turns[kind] = session.turns.get(kind, 0) + 1
        session.append("user", redact(prompt, [secret]))
        session.append("assistant", redact(reply, [secret]))
        return reply


def query(cfg: BackendConfig, prompt: str, session: ConversationState,
          kind: PromptKind) -> str:
    """One round trip: send ``prompt``, record the exchange, return the reply.

    MOCK performs no network I/O. REMOTE authenticates from the named env
    var (E_AUTH before any request when absent), honors Retry-After on 429
    with bounded exponential backoff, and redacts the credential from the
    recorded exchange.
    """
    if cfg.kind is BackendKind.MOCK:
        return _query_mock(cfg, prompt, session, kind)
    return _query_remote(cfg, prompt, session, kind)
