"""Prompt templated agents: rendering, response parsing, backends."""

from .backends import (
    AgentError,
    AuthError,
    BackendConfig,
    BackendKind,
    BackendTimeoutError,
    ConversationState,
    HttpError,
    MockFixtureError,
    RateLimitError,
    SYSTEM_PROMPT,
    load_fixture,
    query,
    redact,
)
from .prompts import (
    HT_INSTRUCTIONS,
    MissingContextError,
    PromptKind,
    default_template_dir,
    render_prompt,
    template_version,
)
from .response import (
    AgentResponse,
    EXPLANATION_FIELDS,
    FormatError,
    TAXONOMY_FIELDS,
    parse_response,
)

__all__ = [
    "AgentError",
    "AgentResponse",
    "AuthError",
    "BackendConfig",
    "BackendKind",
    "BackendTimeoutError",
    "ConversationState",
    "EXPLANATION_FIELDS",
    "FormatError",
    "HT_INSTRUCTIONS",
    "HttpError",
    "MissingContextError",
    "MockFixtureError",
    "PromptKind",
    "RateLimitError",
    "SYSTEM_PROMPT",
    "TAXONOMY_FIELDS",
    "default_template_dir",
    "load_fixture",
    "parse_response",
    "query",
    "redact",
    "render_prompt",
    "template_version",
]
