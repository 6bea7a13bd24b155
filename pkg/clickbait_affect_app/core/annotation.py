"""
Emotion annotation of texts through a pluggable classification backend.

Scores stay unnormalized; the only normalization happens when a distribution is
mapped to VAD.
"""

import logging
from typing import Dict, List, Optional, Sequence

from ..network.dispatcher import BatchDispatcher, ProgressCallback, chunked
from ..network.emotion import EmotionBackend, Scores
from ..network.endpoint_guard import EndpointGuard
from .errors import AggregateFailure, BackendUnavailable, EmptyText, OfflineViolation, TaxonomyMismatch
from .models import AnnotationRecord, EmotionDistribution, ErrorLedger
from .taxonomy import Taxonomy

logger = logging.getLogger(__name__)

STAGE = "annotate"


def _check_backend(backend: EmotionBackend, taxonomy: Taxonomy) -> None:
    if backend.taxonomy_name != taxonomy.name:
        raise TaxonomyMismatch(
            f"Backend {backend.backend_id} emits taxonomy '{backend.taxonomy_name}', configured '{taxonomy.name}'"
        )


def _record(text_id: str, scores: Scores, backend: EmotionBackend, taxonomy: Taxonomy) -> AnnotationRecord:
    taxonomy.check_labels(scores)
    return AnnotationRecord(
        text_id=text_id,
        distribution=EmotionDistribution(dict(scores)),
        backend_id=backend.backend_id,
        taxonomy=taxonomy.name,
    )


def annotate(
    text: str,
    backend: EmotionBackend,
    taxonomy: Taxonomy,
    text_id: str = "",
    guard: Optional[EndpointGuard] = None,
) -> AnnotationRecord:
    """
    Emotion distribution of one text.

    Raises:
        EmptyText: Blank text
        TaxonomyMismatch: Backend taxonomy differs, or a label outside the taxonomy came back
        BackendUnavailable: Transport failure after bounded retries
    """
    if not text or not text.strip():
        raise EmptyText(f"Text {text_id!r} is empty")
    _check_backend(backend, taxonomy)
    if guard is not None:
        guard.record(backend.backend_id, backend.endpoint, 1)
    scores = backend.classify([text], ids=[text_id])[0]
    return _record(text_id, scores, backend, taxonomy)


def annotate_batch(
    texts: Sequence[str],
    backend: EmotionBackend,
    batch_size: int,
    taxonomy: Taxonomy,
    ids: Optional[Sequence[str]] = None,
    guard: Optional[EndpointGuard] = None,
    ledger: Optional[ErrorLedger] = None,
    max_in_flight: int = 1,
    rate_limit_per_sec: float = 0.0,
    callback: Optional[ProgressCallback] = None,
) -> List[AnnotationRecord]:
    """
    Annotate texts in batches, preserving input order.

    Without a ledger the first failure is raised. With a ledger (corpus mode)
    a failed batch is retried item by item and items that still fail are
    recorded and skipped.

    Returns:
        List[AnnotationRecord]: One record per successful text, in input order

    Raises:
        TaxonomyMismatch: Backend taxonomy differs from the configured one
        AggregateFailure: Corpus mode and every text failed
    """
    if not texts:
        return []
    ids = [str(i) for i in ids] if ids is not None else [str(i) for i in range(len(texts))]
    if len(ids) != len(texts):
        raise ValueError(f"{len(ids)} ids given for {len(texts)} texts")
    _check_backend(backend, taxonomy)

    results: Dict[int, AnnotationRecord] = {}
    valid: List[int] = []
    for i, text in enumerate(texts):
        if text and text.strip():
            valid.append(i)
            continue
        error = EmptyText(f"Text {ids[i]!r} is empty")
        if ledger is None:
            raise error
        ledger.record(ids[i], STAGE, error)

    def call(indices: Sequence[int]) -> List[Scores]:
        if guard is not None:
            guard.record(backend.backend_id, backend.endpoint, len(indices))
        scores = backend.classify([texts[i] for i in indices], ids=[ids[i] for i in indices])
        if len(scores) != len(indices):
            raise BackendUnavailable(f"{backend.backend_id} returned {len(scores)} results for {len(indices)} texts")
        return scores

    def convert(i: int, scores: Scores) -> None:
        try:
            results[i] = _record(ids[i], scores, backend, taxonomy)
        except Exception as e:
            if ledger is None:
                raise
            ledger.record(ids[i], STAGE, e)

    batches = chunked(valid, batch_size) if valid else []
    dispatcher = BatchDispatcher(max_in_flight=max_in_flight, rate_limit_per_sec=rate_limit_per_sec)
    outcomes = dispatcher.dispatch(batches, call, callback)

    for batch, outcome in zip(batches, outcomes):
        if outcome.ok:
            for i, scores in zip(batch, outcome.result):
                convert(i, scores)
            continue
        if ledger is None or isinstance(outcome.error, OfflineViolation):
            raise outcome.error
        logger.warning("Annotation batch failed (%s), retrying %d items one by one", outcome.error, len(batch))
        for i in batch:
            try:
                scores = call([i])[0]
            except OfflineViolation:
                raise
            except Exception as e:
                ledger.record(ids[i], STAGE, e)
                continue
            convert(i, scores)

    if not results and ledger is not None:
        raise AggregateFailure(f"All {len(texts)} annotations failed", ledger)
    return [results[i] for i in sorted(results)]
