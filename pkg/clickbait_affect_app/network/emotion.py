"""
Emotion classification backends.

Every backend returns raw per-label scores (unnormalized) for a batch of texts:

- ``HttpEmotionBackend``: JSON classification endpoint over ``requests`` with
  urllib3 retries.
- ``FileEmotionBackend``: precomputed score tables keyed by text id.
- ``KeywordFallbackBackend``: pure keyword-overlap rule for offline runs.
"""

import logging
import os
import re
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import requests
from dotenv import load_dotenv
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ..core.errors import BackendUnavailable
from ..core.taxonomy import DEFAULT_TAXONOMY_NAME, NEUTRAL_EMOTION
from ..storage.records import JsonlStore
from ..utils.hashing import text_hash
from .endpoint_guard import LOCAL_ENDPOINT

logger = logging.getLogger(__name__)

DEFAULT_EMOTION_MODEL = "SamLowe/roberta-base-go_emotions"

Scores = Dict[str, float]

_WORD = re.compile(r"[a-z']+")


class EmotionBackend(ABC):
    """
    Provider of per-label emotion scores.

    Attributes:
        backend_id: Short backend name recorded on every AnnotationRecord
        model_id: Classifier name
        endpoint: URL contacted, or "local"
        taxonomy_name: Label set the backend emits
    """

    backend_id: str = "emotion"
    model_id: str = ""
    endpoint: str = LOCAL_ENDPOINT
    taxonomy_name: str = DEFAULT_TAXONOMY_NAME

    @abstractmethod
    def classify(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[Scores]:
        """Return one score map per text, in order (one transport call)."""


def parse_scores(payload: Any) -> List[Scores]:
    """
    Decode a classification response.

    Accepted shapes:
        {"results": [{label: score, ...}, ...]}
        [[{"label": ..., "score": ...}, ...], ...]
        [{label: score, ...}, ...]

    Raises:
        BackendUnavailable: Unrecognized response shape
    """
    if isinstance(payload, Mapping) and "results" in payload:
        payload = payload["results"]
    if not isinstance(payload, list):
        raise BackendUnavailable(f"Unexpected emotion response: {str(payload)[:120]}")
    results: List[Scores] = []
    for item in payload:
        if isinstance(item, Mapping) and not {"label", "score"} <= set(item):
            results.append({str(k): float(v) for k, v in item.items()})
        elif isinstance(item, list):
            results.append({str(e["label"]): float(e["score"]) for e in item})
        else:
            raise BackendUnavailable(f"Unexpected emotion response item: {str(item)[:120]}")
    return results


class HttpEmotionBackend(EmotionBackend):
    """
    JSON classification endpoint.

    Request body: ``{"model": <model_id>, "inputs": [texts]}``. Transient HTTP
    failures (429/5xx, connection errors) are retried by urllib3 with
    exponential backoff.
    """

    backend_id = "http-emotion"

    def __init__(
        self,
        url: str,
        model_id: str = DEFAULT_EMOTION_MODEL,
        api_key_env: Optional[str] = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        taxonomy_name: str = DEFAULT_TAXONOMY_NAME,
    ):
        self.endpoint = url
        self.model_id = model_id
        self.timeout = timeout
        self.taxonomy_name = taxonomy_name
        self.session = requests.Session()
        retry = Retry(
            total=max_retries,
            backoff_factor=0.5,
            status_forcelist=(429, 500, 502, 503, 504),
            allowed_methods=frozenset(["POST"]),
            raise_on_status=False,
        )
        self.session.mount("http://", HTTPAdapter(max_retries=retry))
        self.session.mount("https://", HTTPAdapter(max_retries=retry))
        load_dotenv()
        api_key = os.getenv(api_key_env, "") if api_key_env else ""
        if api_key:
            self.session.headers["Authorization"] = f"Bearer {api_key}"

    def classify(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[Scores]:
        try:
            response = self.session.post(
                self.endpoint,
                json={"model": self.model_id, "inputs": list(texts)},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except (requests.RequestException, ValueError) as e:
            raise BackendUnavailable(f"{self.backend_id}: {e}") from e
        results = parse_scores(payload)
        if len(results) != len(texts):
            raise BackendUnavailable(f"{self.backend_id}: {len(results)} results for {len(texts)} texts")
        return results


class FileEmotionBackend(EmotionBackend):
    """
    Precomputed scores from a JSONL file of ``{"text_id": ..., "scores": {...}}``.

    Lines may key by ``text_hash`` instead; lookups try the id first.
    """

    backend_id = "file-emotion"

    def __init__(self, path: Union[str, Path], taxonomy_name: str = DEFAULT_TAXONOMY_NAME, model_id: str = "precomputed"):
        self.path = Path(path)
        self.taxonomy_name = taxonomy_name
        self.model_id = model_id
        self._by_id: Dict[str, Scores] = {}
        self._by_hash: Dict[str, Scores] = {}
        for record in JsonlStore(self.path).read():
            scores = {str(k): float(v) for k, v in record["scores"].items()}
            if "text_id" in record:
                self._by_id[str(record["text_id"])] = scores
            if "text_hash" in record:
                self._by_hash[str(record["text_hash"])] = scores

    def classify(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[Scores]:
        results = []
        for i, text in enumerate(texts):
            text_id = ids[i] if ids is not None else None
            scores = self._by_id.get(text_id) if text_id is not None else None
            if scores is None:
                scores = self._by_hash.get(text_hash(text))
            if scores is None:
                raise BackendUnavailable(f"file-emotion: no scores for id={text_id!r} in {self.path}")
            results.append(dict(scores))
        return results


class KeywordFallbackBackend(EmotionBackend):
    """
    Keyword-overlap classifier.

    Every emotion whose keyword appears in the text gets weight 1.0; a text with
    no keyword is a point mass on the neutral label. Pure: no I/O after
    construction.
    """

    backend_id = "keyword-fallback"

    def __init__(
        self,
        keywords: Mapping[str, str],
        taxonomy_name: str = DEFAULT_TAXONOMY_NAME,
        neutral_label: str = NEUTRAL_EMOTION,
        version: str = "",
    ):
        self.keywords = {k.lower(): v for k, v in keywords.items()}
        self.taxonomy_name = taxonomy_name
        self.neutral_label = neutral_label
        self.model_id = f"keywords-{version}" if version else "keywords"

    def scores_for(self, text: str) -> Scores:
        matched = sorted({self.keywords[w] for w in _WORD.findall(text.lower()) if w in self.keywords})
        if not matched:
            return {self.neutral_label: 1.0}
        return {label: 1.0 for label in matched}

    def classify(self, texts: Sequence[str], ids: Optional[Sequence[str]] = None) -> List[Scores]:
        return [self.scores_for(t) for t in texts]
