"""
Generation backends for stylistic rewrites.

``OpenAIChatBackend`` talks to an OpenAI-compatible chat-completions endpoint.
``EchoGenerationBackend`` and ``AffixGenerationBackend`` are offline,
deterministic substitutes used by tests and desk runs.
"""

import logging
import re
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional

from ..core.models import DecodeParams
from .endpoint_guard import LOCAL_ENDPOINT
from .openai_client import call_with_retries, create_client

logger = logging.getLogger(__name__)

DEFAULT_GENERATION_MODEL = "microsoft/Phi-3-mini-4k-instruct"
DEFAULT_CONTEXT_WINDOW = 4096

Messages = List[Dict[str, str]]

_TOKEN_ESTIMATE = re.compile(r"\w+|[^\w\s]")
_SOURCE_SPAN = re.compile(r"<text>(.*?)</text>", re.DOTALL)


def estimate_tokens(text: str) -> int:
    """Rough token count: words plus punctuation marks."""
    return len(_TOKEN_ESTIMATE.findall(text))


def extract_source(messages: Messages) -> str:
    """Text between ``<text>`` and ``</text>`` in the last message that has one."""
    for message in reversed(messages):
        match = _SOURCE_SPAN.search(message.get("content", ""))
        if match:
            return match.group(1).strip()
    return ""


class GenerationBackend(ABC):
    """
    Provider of chat completions.

    Attributes:
        backend_id: Short backend name recorded in provenance
        model_id: Model name recorded in provenance and cache keys
        endpoint: URL contacted, or "local"
        context_window: Token budget for prompt plus generation
    """

    backend_id: str = "generation"
    model_id: str = ""
    endpoint: str = LOCAL_ENDPOINT
    context_window: int = DEFAULT_CONTEXT_WINDOW

    @abstractmethod
    def generate(self, messages: Messages, params: DecodeParams, hints: Optional[Mapping[str, Any]] = None) -> str:
        """
        Return the raw completion text for ``messages``.

        Args:
            messages: Chat messages (role/content)
            params: Decode parameters
            hints: Structured request facts ("style", "source_text"); network
                   backends ignore them
        """


class OpenAIChatBackend(GenerationBackend):
    """Chat completions from an OpenAI-compatible endpoint."""

    backend_id = "openai-chat"

    def __init__(
        self,
        base_url: str,
        model_id: str = DEFAULT_GENERATION_MODEL,
        api_key_env: Optional[str] = None,
        timeout: float = 120.0,
        max_retries: int = 3,
        context_window: int = DEFAULT_CONTEXT_WINDOW,
    ):
        self.endpoint = base_url
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.context_window = int(context_window)
        self._client = None

    @property
    def client(self):
        if self._client is None:
            self._client = create_client(self.endpoint, self.api_key_env, self.timeout)
        return self._client

    def generate(self, messages: Messages, params: DecodeParams, hints: Optional[Mapping[str, Any]] = None) -> str:
        response = call_with_retries(
            lambda: self.client.chat.completions.create(
                model=self.model_id,
                messages=messages,
                temperature=params.temperature,
                top_p=params.top_p,
                max_tokens=params.max_new_tokens,
            ),
            self.max_retries,
            self.backend_id,
        )
        if not response.choices:
            return ""
        return response.choices[0].message.content or ""


class EchoGenerationBackend(GenerationBackend):
    """Returns the source text embedded in the prompt, unchanged."""

    backend_id = "echo"
    model_id = "echo"

    def generate(self, messages: Messages, params: DecodeParams, hints: Optional[Mapping[str, Any]] = None) -> str:
        return extract_source(messages)


# Style-dependent frames of the affix backend: (prefix, suffix, quoted)
AFFIX_FRAMES: Dict[str, tuple] = {
    "clickbait": ("You won't believe this shocking secret:", "The truth will amaze you!", True),
    "neutral": ("Report:", "", False),
    "formal": ("It has been noted that", "We are grateful for your attention.", False),
    "casual": ("So, funny story:", "lol", False),
    "inspirational": ("Stay hopeful:", "Believe in yourself and keep going!", False),
    "humor": ("Breaking, in the silliest news:", "Hilarious, honestly.", False),
}


class AffixGenerationBackend(GenerationBackend):
    """
    Deterministic rewrite that frames the source with style-specific phrases.

    The phrases carry emotion keywords of the bundled fallback lexicon, so
    different styles receive different emotion distributions offline. Clickbait
    rewrites come back wrapped in quotes, as instruction models often do.
    """

    backend_id = "affix"
    model_id = "affix-v1"

    def generate(self, messages: Messages, params: DecodeParams, hints: Optional[Mapping[str, Any]] = None) -> str:
        hints = hints or {}
        source = str(hints.get("source_text") or extract_source(messages))
        if not source:
            return ""
        prefix, suffix, quoted = AFFIX_FRAMES.get(str(hints.get("style", "")), ("", "", False))
        text = " ".join(part for part in (prefix, source.rstrip("."), suffix) if part)
        return f'"{text}"' if quoted else text
