"""Backend construction from the pipeline configuration."""

import logging
from typing import Mapping, Optional

from ..core.config import EmbeddingConfig, EmotionConfig, GenerationConfig, PipelineConfig
from ..core.taxonomy import Taxonomy
from .embedding import (
    DEFAULT_EMBEDDING_MODEL,
    EmbeddingBackend,
    FileEmbeddingBackend,
    HashEmbeddingBackend,
    OpenAIEmbeddingBackend,
)
from .emotion import (
    DEFAULT_EMOTION_MODEL,
    EmotionBackend,
    FileEmotionBackend,
    HttpEmotionBackend,
    KeywordFallbackBackend,
)
from .endpoint_guard import EndpointGuard
from .generation import (
    DEFAULT_GENERATION_MODEL,
    AffixGenerationBackend,
    EchoGenerationBackend,
    GenerationBackend,
    OpenAIChatBackend,
)

logger = logging.getLogger(__name__)


def build_guard(config: PipelineConfig) -> EndpointGuard:
    """Endpoint guard allowing exactly the endpoints named in the configuration."""
    endpoints = [config.embedding.base_url, config.generation.base_url, config.emotion.url]
    return EndpointGuard([e for e in endpoints if e], offline=config.offline)


def build_embedding_backend(config: EmbeddingConfig, seed: int = 0) -> EmbeddingBackend:
    if config.backend == "hash":
        return HashEmbeddingBackend(dim=config.dim, seed=seed)
    if config.backend == "file":
        return FileEmbeddingBackend(config.path, model_id=config.model_id or "precomputed")
    return OpenAIEmbeddingBackend(
        base_url=config.base_url,
        model_id=config.model_id or DEFAULT_EMBEDDING_MODEL,
        api_key_env=config.api_key_env,
        timeout=config.timeout,
        max_retries=config.max_retries,
    )


def build_generation_backend(config: GenerationConfig) -> GenerationBackend:
    if config.backend == "echo":
        return EchoGenerationBackend()
    if config.backend == "affix":
        return AffixGenerationBackend()
    return OpenAIChatBackend(
        base_url=config.base_url,
        model_id=config.model_id or DEFAULT_GENERATION_MODEL,
        api_key_env=config.api_key_env,
        timeout=config.timeout,
        max_retries=config.max_retries,
        context_window=config.context_window,
    )


def build_emotion_backend(
    config: EmotionConfig,
    taxonomy: Taxonomy,
    keywords: Optional[Mapping[str, str]] = None,
    keywords_version: str = "",
) -> EmotionBackend:
    """
    Args:
        config: Emotion section
        taxonomy: Active taxonomy
        keywords: Keyword lexicon for the fallback backend
        keywords_version: Recorded in the fallback backend's model id
    """
    if config.backend == "keywords":
        return KeywordFallbackBackend(keywords or {}, taxonomy_name=taxonomy.name, version=keywords_version)
    if config.backend == "file":
        return FileEmotionBackend(config.path, taxonomy_name=taxonomy.name, model_id=config.model_id or "precomputed")
    return HttpEmotionBackend(
        url=config.url,
        model_id=config.model_id or DEFAULT_EMOTION_MODEL,
        api_key_env=config.api_key_env,
        timeout=config.timeout,
        max_retries=config.max_retries,
        taxonomy_name=taxonomy.name,
    )
