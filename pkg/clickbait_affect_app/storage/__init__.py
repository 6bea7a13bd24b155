"""Persistence: JSONL record files, run manifest, caches and corpus loaders."""

from .cache import EmbeddingCache, GenerationCache
from .corpus import FieldMapping, IngestCounts, ingest_headlines, ingest_posts, load_predictions
from .manifest import RunManifest
from .records import JsonlStore, file_hash

__all__ = [
    'EmbeddingCache',
    'GenerationCache',
    'FieldMapping',
    'IngestCounts',
    'ingest_headlines',
    'ingest_posts',
    'load_predictions',
    'RunManifest',
    'JsonlStore',
    'file_hash',
]
