"""
Embedding backends and order-preserving batch embedding.

Backends:

- ``HashEmbeddingBackend``: deterministic test backend, a seeded hash of the
  token multiset spread over a fixed number of dimensions.
- ``FileEmbeddingBackend``: precomputed vectors keyed by record id.
- ``OpenAIEmbeddingBackend``: OpenAI-compatible ``/embeddings`` endpoint.
"""

import hashlib
import logging
import re
from abc import ABC, abstractmethod
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import BackendUnavailable, DimMismatch, EmptyText
from ..core.models import EmbeddedRecord, EmbeddingVector
from ..storage.cache import EmbeddingCache
from ..storage.records import JsonlStore
from ..utils.hashing import text_hash
from .dispatcher import BatchDispatcher, ProgressCallback, chunked
from .endpoint_guard import LOCAL_ENDPOINT, EndpointGuard
from .openai_client import call_with_retries, create_client

logger = logging.getLogger(__name__)

DEFAULT_EMBEDDING_MODEL = "BAAI/bge-large-en-v1.5"
DEFAULT_HASH_DIM = 64

_TOKEN = re.compile(r"\w+")


class EmbeddingBackend(ABC):
    """
    Provider of raw (unnormalized) embedding vectors.

    Attributes:
        backend_id: Short backend name recorded in provenance
        model_id: Model name recorded in provenance and cache keys
        endpoint: URL contacted, or "local"
    """

    backend_id: str = "embedding"
    model_id: str = ""
    endpoint: str = LOCAL_ENDPOINT

    @abstractmethod
    def embed(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[List[float]]:
        """Return one raw vector per text, in order (one transport call)."""


class HashEmbeddingBackend(EmbeddingBackend):
    """
    Deterministic embedding of the lowercase word-token multiset.

    Every token adds its count to four hashed buckets with hashed weights in
    [0.5, 1.5]; identical texts map to identical vectors and no I/O happens.
    """

    backend_id = "hash"

    def __init__(self, dim: int = DEFAULT_HASH_DIM, seed: int = 0):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)
        self.model_id = f"hash-{self.dim}-seed{self.seed}"

    def _vector(self, text: str) -> List[float]:
        tokens = _TOKEN.findall(text.lower()) or list(text.strip())
        vec = np.zeros(self.dim, dtype=np.float64)
        for token, count in sorted(Counter(tokens).items()):
            digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
            for k in range(4):
                idx = int.from_bytes(digest[2 * k:2 * k + 2], "big") % self.dim
                vec[idx] += count * (0.5 + digest[8 + k] / 255.0)
        return vec.tolist()

    def embed(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[List[float]]:
        return [self._vector(t) for t in texts]


class FileEmbeddingBackend(EmbeddingBackend):
    """
    Precomputed vectors from a JSONL file of ``{"id": ..., "vector": [...]}``.

    Lines may carry ``text_hash`` instead of (or beside) ``id``; lookups try the
    record id first, then the SHA-256 of the text.
    """

    backend_id = "file"

    def __init__(self, path: Union[str, Path], model_id: str = "precomputed"):
        self.path = Path(path)
        self.model_id = model_id
        self._by_id: Dict[str, List[float]] = {}
        self._by_hash: Dict[str, List[float]] = {}
        for record in JsonlStore(self.path).read():
            vector = [float(v) for v in record["vector"]]
            if "id" in record:
                self._by_id[str(record["id"])] = vector
            if "text_hash" in record:
                self._by_hash[str(record["text_hash"])] = vector
        logger.info("Loaded %d precomputed vectors from %s", len(self._by_id) + len(self._by_hash), self.path)

    def embed(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[List[float]]:
        vectors = []
        for i, text in enumerate(texts):
            record_id = ids[i] if ids is not None else None
            vector = self._by_id.get(record_id) if record_id is not None else None
            if vector is None:
                vector = self._by_hash.get(text_hash(text))
            if vector is None:
                raise BackendUnavailable(f"file: no precomputed vector for id={record_id!r} in {self.path}")
            vectors.append(list(vector))
        return vectors


class OpenAIEmbeddingBackend(EmbeddingBackend):
    """Embeddings from an OpenAI-compatible endpoint."""

    backend_id = "openai-embeddings"

    def __init__(
        self,
        base_url: str,
        model_id: str = DEFAULT_EMBEDDING_MODEL,
        api_key_env: Optional[str] = None,
        timeout: float = 60.0,
        max_retries: int = 3,
    ):
        self.endpoint = base_url
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self._client = None

    @property
    def client(self):
        if self._client is None:
            self._client = create_client(self.endpoint, self.api_key_env, self.timeout)
        return self._client

    def embed(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[List[float]]:
        response = call_with_retries(
            lambda: self.client.embeddings.create(model=self.model_id, input=list(texts)),
            self.max_retries,
            self.backend_id,
        )
        data = sorted(response.data, key=lambda item: item.index)
        return [list(item.embedding) for item in data]


def _check_texts(texts: Sequence[str], ids: Optional[Sequence[str]]) -> None:
    if ids is not None and len(ids) != len(texts):
        raise ValueError(f"{len(ids)} ids given for {len(texts)} texts")
    for i, text in enumerate(texts):
        if not isinstance(text, str) or not text.strip():
            label = ids[i] if ids is not None else i
            raise EmptyText(f"Text {label!r} is empty")


def embed_batch(
    texts: Sequence[str],
    backend: EmbeddingBackend,
    batch_size: int,
    ids: Optional[Sequence[str]] = None,
    max_in_flight: int = 1,
    rate_limit_per_sec: float = 0.0,
    guard: Optional[EndpointGuard] = None,
    cache: Optional[EmbeddingCache] = None,
    callback: Optional[ProgressCallback] = None,
) -> List[EmbeddingVector]:
    """
    Embed texts in batches and return L2-normalized vectors in input order.

    Cached vectors are reused without contacting the backend; only the misses
    are sent, ``batch_size`` texts per transport call.

    Raises:
        EmptyText: A text is empty after trimming
        BackendUnavailable: Transport failure after bounded retries
        DimMismatch: The backend returned vectors of different lengths
        OfflineViolation: The backend endpoint is not permitted
    """
    _check_texts(texts, ids)
    if not texts:
        return []

    raw: List[Optional[List[float]]] = [None] * len(texts)
    if cache is not None:
        for i, text in enumerate(texts):
            raw[i] = cache.get(backend.backend_id, backend.model_id, text)
    missing = [i for i, vector in enumerate(raw) if vector is None]

    if missing:
        if guard is not None:
            guard.check(backend.endpoint)

        def worker(batch: Sequence[int]) -> List[List[float]]:
            if guard is not None:
                guard.record(backend.backend_id, backend.endpoint, len(batch))
            batch_ids = [ids[i] for i in batch] if ids is not None else None
            vectors = backend.embed([texts[i] for i in batch], ids=batch_ids)
            if len(vectors) != len(batch):
                raise BackendUnavailable(
                    f"{backend.backend_id}: {len(vectors)} vectors returned for {len(batch)} texts"
                )
            return vectors

        batches = chunked(missing, batch_size)
        dispatcher = BatchDispatcher(max_in_flight=max_in_flight, rate_limit_per_sec=rate_limit_per_sec)
        outcomes = dispatcher.dispatch(batches, worker, callback)
        for batch, outcome in zip(batches, outcomes):
            if outcome.error is not None:
                raise outcome.error
            for i, vector in zip(batch, outcome.result):
                raw[i] = vector
                if cache is not None:
                    cache.put(backend.backend_id, backend.model_id, texts[i], vector)
        logger.debug("Embedded %d texts (%d from cache) with %s", len(texts), len(texts) - len(missing), backend.model_id)

    dims = {len(v) for v in raw}
    if len(dims) != 1:
        raise DimMismatch(f"{backend.backend_id} returned vectors of dims {sorted(dims)}")
    return [EmbeddingVector.unit(v) for v in raw]


def embed_records(
    items: Sequence[Tuple[str, str]],
    backend: EmbeddingBackend,
    batch_size: int,
    **kwargs,
) -> List[EmbeddedRecord]:
    """
    Embed ``(record_id, text)`` pairs.

    Keyword arguments are passed to ``embed_batch``.
    """
    ids = [record_id for record_id, _ in items]
    vectors = embed_batch([text for _, text in items], backend, batch_size, ids=ids, **kwargs)
    return [EmbeddedRecord(record_id, vector) for record_id, vector in zip(ids, vectors)]
