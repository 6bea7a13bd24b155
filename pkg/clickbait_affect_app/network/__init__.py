"""Backend clients, request dispatching and endpoint control."""

from .dispatcher import BatchDispatcher, BatchOutcome, chunked
from .embedding import (
    EmbeddingBackend,
    FileEmbeddingBackend,
    HashEmbeddingBackend,
    OpenAIEmbeddingBackend,
    embed_batch,
    embed_records,
)
from .emotion import EmotionBackend, FileEmotionBackend, HttpEmotionBackend, KeywordFallbackBackend
from .endpoint_guard import LOCAL_ENDPOINT, EndpointGuard
from .generation import (
    AffixGenerationBackend,
    EchoGenerationBackend,
    GenerationBackend,
    OpenAIChatBackend,
)

__all__ = [
    'BatchDispatcher',
    'BatchOutcome',
    'chunked',
    'EmbeddingBackend',
    'FileEmbeddingBackend',
    'HashEmbeddingBackend',
    'OpenAIEmbeddingBackend',
    'embed_batch',
    'embed_records',
    'EmotionBackend',
    'FileEmotionBackend',
    'HttpEmotionBackend',
    'KeywordFallbackBackend',
    'LOCAL_ENDPOINT',
    'EndpointGuard',
    'AffixGenerationBackend',
    'EchoGenerationBackend',
    'GenerationBackend',
    'OpenAIChatBackend',
]
