"""OpenAI-compatible client helpers with bounded exponential-backoff retries."""

import logging
import os
from typing import Callable, Optional, TypeVar

import backoff
import openai
from dotenv import load_dotenv

from ..core.errors import BackendUnavailable, ContextOverflow

logger = logging.getLogger(__name__)

T = TypeVar("T")

RETRYABLE_ERRORS = (
    openai.APIConnectionError,
    openai.RateLimitError,
    openai.InternalServerError,
)


def create_client(base_url: str, api_key_env: Optional[str], timeout: float) -> openai.OpenAI:
    """
    Create a client for an OpenAI-compatible endpoint.

    The key is read from the environment variable named ``api_key_env`` (a local
    ``.env`` file is honoured). Local servers usually accept any key, so a
    placeholder is sent when the variable is unset. Retries are handled by
    ``call_with_retries``, not by the client.
    """
    load_dotenv()
    api_key = os.getenv(api_key_env, "") if api_key_env else ""
    if not api_key:
        logger.debug("No API key in %s, using placeholder for %s", api_key_env, base_url)
    return openai.OpenAI(api_key=api_key or "EMPTY", base_url=base_url, timeout=timeout, max_retries=0)


def _is_context_overflow(error: Exception) -> bool:
    code = getattr(error, "code", None)
    return code == "context_length_exceeded" or "maximum context length" in str(error).lower()


def call_with_retries(request: Callable[[], T], max_retries: int, backend_id: str) -> T:
    """
    Run ``request`` with up to ``max_retries`` retries on transport errors.

    Raises:
        ContextOverflow: The endpoint rejected the prompt as too long
        BackendUnavailable: Transport or API failure after the last retry
    """
    retrying = backoff.on_exception(
        backoff.expo,
        RETRYABLE_ERRORS,
        max_tries=max(1, int(max_retries) + 1),
        max_value=30,
        logger=logger,
    )(request)
    try:
        return retrying()
    except openai.BadRequestError as e:
        if _is_context_overflow(e):
            raise ContextOverflow(f"{backend_id}: {e}") from e
        raise BackendUnavailable(f"{backend_id}: request rejected: {e}") from e
    except RETRYABLE_ERRORS as e:
        raise BackendUnavailable(f"{backend_id}: gave up after {max_retries} retries: {e}") from e
    except openai.APIError as e:
        raise BackendUnavailable(f"{backend_id}: {e}") from e
