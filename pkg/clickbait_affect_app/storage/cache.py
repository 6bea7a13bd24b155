"""
Content-addressed caches for backend results.

Both caches are append-only JSONL files: a lookup never contacts a backend, a
miss is filled by exactly one appended record. Records are indexed in memory
on first use.
"""

import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..utils.hashing import content_hash, text_hash
from .records import JsonlStore

logger = logging.getLogger(__name__)


class _AppendOnlyCache:
    """Shared index/append logic; subclasses define the record layout."""

    def __init__(self, path: Union[str, Path]):
        self.store = JsonlStore(path)
        self._index: Optional[Dict[str, Dict[str, Any]]] = None
        self._lock = threading.Lock()
        self._key_locks: Dict[str, threading.Lock] = {}

    def key_lock(self, key: str) -> threading.Lock:
        """Lock serializing the fill of one key across worker threads."""
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def _load(self) -> Dict[str, Dict[str, Any]]:
        if self._index is None:
            index: Dict[str, Dict[str, Any]] = {}
            # a crash mid-append leaves at most one torn line, skip it
            for record in self.store.iter_records(strict=False):
                key = record.get("key")
                if key and key not in index:
                    index[key] = record
            self._index = index
            logger.debug("Loaded %d cache records from %s", len(index), self.store.path)
        return self._index

    def _get(self, key: str) -> Optional[Dict[str, Any]]:
        with self._lock:
            return self._load().get(key)

    def _put(self, key: str, record: Dict[str, Any]) -> bool:
        with self._lock:
            index = self._load()
            if key in index:
                return False
            record = dict(record, key=key)
            self.store.append(record)
            index[key] = record
            return True

    def __contains__(self, key: object) -> bool:
        with self._lock:
            return key in self._load()

    def __len__(self) -> int:
        with self._lock:
            return len(self._load())

    @property
    def path(self) -> Path:
        return self.store.path


class GenerationCache(_AppendOnlyCache):
    """
    Cache of stylization results keyed by
    hash(template version, style, model id, decode params, source text).
    """

    @staticmethod
    def make_key(template_version: str, style: str, model_id: str, params: Dict[str, Any], source_text: str) -> str:
        return content_hash([template_version, style, model_id, params, source_text])

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        """
        Look up a cached generation.

        Returns:
            Optional[Dict[str, Any]]: Record with "style", "raw_text", "text" and
            "provenance", or None on a miss
        """
        return self._get(key)

    def put(self, key: str, style: str, raw_text: str, text: str, provenance: Dict[str, Any]) -> bool:
        """
        Store a generation unless the key is already present.

        Returns:
            bool: True if a record was appended
        """
        return self._put(key, {"style": style, "raw_text": raw_text, "text": text, "provenance": provenance})


class EmbeddingCache(_AppendOnlyCache):
    """Cache of embedding vectors keyed by (backend id, model id, text content hash)."""

    @staticmethod
    def make_key(backend_id: str, model_id: str, text: str) -> str:
        return content_hash([backend_id, model_id, text_hash(text)])

    def get(self, backend_id: str, model_id: str, text: str) -> Optional[List[float]]:
        record = self._get(self.make_key(backend_id, model_id, text))
        return None if record is None else list(record["vector"])

    def put(self, backend_id: str, model_id: str, text: str, vector: List[float]) -> bool:
        key = self.make_key(backend_id, model_id, text)
        return self._put(key, {
            "backend_id": backend_id,
            "model_id": model_id,
            "content_hash": text_hash(text),
            "vector": [float(v) for v in vector],
        })
