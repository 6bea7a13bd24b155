"""
Semantic alignment of clickbait headlines to social posts.

Headlines and posts arrive as normalized embeddings, so cosine similarity is a
dot product. Records are ordered by natural id order before any computation;
every tie-break ("smaller id") refers to that order.

Two alignments are provided:

- ``top1_align``: every headline takes its most similar post (posts may repeat).
- ``one_to_one_align``: global greedy assignment over all (headline, post) pairs
  sorted by similarity descending, then headline id, then post id. A pair is
  accepted when both sides are still free.
"""

import logging
import math
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.hashing import natural_key
from .errors import DimMismatch, EmptyCorpus, ValidationError, ZeroVector
from .models import AlignedPair, AlignmentReport, EmbeddedRecord, EmbeddingVector

logger = logging.getLogger(__name__)

# Similarity matrices larger than this are processed in row blocks
DEFAULT_MAX_MATRIX_ENTRIES = 400_000_000


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """
    Cosine similarity of two vectors, clamped to [-1, 1].

    Raises:
        DimMismatch: Dimensions differ
        ZeroVector: Either vector is zero
    """
    if a.dim != b.dim:
        raise DimMismatch(f"Cannot compare dim {a.dim} with dim {b.dim}")
    va = np.asarray(a.values, dtype=np.float64)
    vb = np.asarray(b.values, dtype=np.float64)
    norm_a = np.linalg.norm(va)
    norm_b = np.linalg.norm(vb)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("Cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(va, vb) / (norm_a * norm_b), -1.0, 1.0))


def _sorted_records(records: Sequence[EmbeddedRecord], kind: str) -> List[EmbeddedRecord]:
    if not records:
        raise EmptyCorpus(f"No {kind} to align")
    ids = [r.record_id for r in records]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"Duplicate {kind} ids")
    return sorted(records, key=lambda r: natural_key(r.record_id))


def _unit_matrix(records: Sequence[EmbeddedRecord], kind: str) -> np.ndarray:
    dims = {r.vector.dim for r in records}
    if len(dims) != 1:
        raise DimMismatch(f"Inconsistent {kind} embedding dims: {sorted(dims)}")
    matrix = np.array([r.vector.values for r in records], dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector(f"Zero {kind} embedding")
    return matrix / norms[:, None]


def _prepare(headlines, posts) -> Tuple[List[EmbeddedRecord], List[EmbeddedRecord], np.ndarray, np.ndarray]:
    heads = _sorted_records(headlines, "headlines")
    pool = _sorted_records(posts, "posts")
    h_matrix = _unit_matrix(heads, "headline")
    p_matrix = _unit_matrix(pool, "post")
    if h_matrix.shape[1] != p_matrix.shape[1]:
        raise DimMismatch(
            f"Headline dim {h_matrix.shape[1]} differs from post dim {p_matrix.shape[1]}"
        )
    return heads, pool, h_matrix, p_matrix


def similarity_blocks(
    h_matrix: np.ndarray,
    p_matrix: np.ndarray,
    max_entries: int = DEFAULT_MAX_MATRIX_ENTRIES,
) -> Iterator[Tuple[int, np.ndarray]]:
    """
    Yield (first_row, block) slices of the clamped similarity matrix.

    Blocks hold at most ``max_entries`` entries (never less than one row).
    Every row is computed on its own, so an entry has the same bits whatever
    the block height.
    """
    n_rows, n_cols = h_matrix.shape[0], p_matrix.shape[0]
    rows_per_block = max(1, int(max_entries) // max(1, n_cols))
    if rows_per_block < n_rows:
        logger.info("Streaming %dx%d similarity matrix in blocks of %d rows",
                    n_rows, n_cols, rows_per_block)
    p_t = p_matrix.T
    for start in range(0, n_rows, rows_per_block):
        stop = min(start + rows_per_block, n_rows)
        block = np.empty((stop - start, n_cols), dtype=np.float64)
        for offset in range(stop - start):
            block[offset] = h_matrix[start + offset] @ p_t
        yield start, np.clip(block, -1.0, 1.0, out=block)


def greedy_assignment(
    similarity: np.ndarray,
    floor: Optional[float] = None,
) -> List[Tuple[int, int, float]]:
    """
    Global greedy one-to-one assignment on a similarity matrix.

    Pairs are visited by similarity descending, then row index, then column
    index; a pair is accepted iff both its row and column are unassigned and its
    similarity is >= floor (when given).

    Args:
        similarity: (n_rows, n_cols) matrix
        floor: Optional minimum similarity

    Returns:
        List of (row, col, similarity) in acceptance order
    """
    similarity = np.asarray(similarity, dtype=np.float64)
    n_rows, n_cols = similarity.shape
    rows, cols = np.indices((n_rows, n_cols))
    return _greedy_from_candidates(rows.ravel(), cols.ravel(), similarity.ravel(), floor, min(n_rows, n_cols))


def _greedy_from_candidates(rows, cols, values, floor, limit) -> List[Tuple[int, int, float]]:
    # lexsort: last key is primary
    order = np.lexsort((cols, rows, -values))
    taken_rows = set()
    taken_cols = set()
    accepted: List[Tuple[int, int, float]] = []
    for idx in order:
        value = float(values[idx])
        if floor is not None and value < floor:
            break
        r, c = int(rows[idx]), int(cols[idx])
        if r in taken_rows or c in taken_cols:
            continue
        taken_rows.add(r)
        taken_cols.add(c)
        accepted.append((r, c, value))
        if len(accepted) == limit:
            break
    return accepted


def top1_align(
    headlines: Sequence[EmbeddedRecord],
    posts: Sequence[EmbeddedRecord],
    max_matrix_entries: int = DEFAULT_MAX_MATRIX_ENTRIES,
) -> List[AlignedPair]:
    """
    Align every headline to its most similar post (ties to the smaller post id).

    Raises:
        EmptyCorpus: Either side is empty
    """
    heads, pool, h_matrix, p_matrix = _prepare(headlines, posts)
    pairs: List[AlignedPair] = []
    for start, block in similarity_blocks(h_matrix, p_matrix, max_matrix_entries):
        # argmax returns the first maximum, i.e. the smaller post id
        best = np.argmax(block, axis=1)
        for offset, col in enumerate(best):
            pairs.append(AlignedPair(
                headline_id=heads[start + offset].record_id,
                post_id=pool[int(col)].record_id,
                similarity=float(block[offset, col]),
            ))
    return pairs


def one_to_one_align(
    headlines: Sequence[EmbeddedRecord],
    posts: Sequence[EmbeddedRecord],
    min_similarity: Optional[float] = None,
    max_matrix_entries: int = DEFAULT_MAX_MATRIX_ENTRIES,
) -> Tuple[List[AlignedPair], AlignmentReport]:
    """
    Greedy one-to-one alignment: each post and each headline appear at most once.

    When the similarity matrix exceeds ``max_matrix_entries`` only the best
    ``min(n_headlines, n_posts)`` posts of every row are kept as candidates; a
    headline is always matched within that prefix, so the result is unchanged.

    Args:
        headlines: Embedded headlines
        posts: Embedded posts
        min_similarity: Pairs below this similarity are never accepted
        max_matrix_entries: Streaming threshold

    Returns:
        (pairs in acceptance order, AlignmentReport)

    Raises:
        EmptyCorpus: Either side is empty
    """
    heads, pool, h_matrix, p_matrix = _prepare(headlines, posts)
    n_rows, n_cols = len(heads), len(pool)
    limit = min(n_rows, n_cols)

    if n_rows * n_cols <= max_matrix_entries:
        blocks = similarity_blocks(h_matrix, p_matrix, max_matrix_entries)
        similarity = np.vstack([block for _, block in blocks])
        accepted = greedy_assignment(similarity, floor=min_similarity)
    else:
        rows_parts, cols_parts, value_parts = [], [], []
        for start, block in similarity_blocks(h_matrix, p_matrix, max_matrix_entries):
            # stable sort on -similarity keeps smaller post ids first among ties
            top = np.argsort(-block, axis=1, kind="stable")[:, :limit]
            block_rows = np.repeat(np.arange(start, start + block.shape[0]), top.shape[1])
            rows_parts.append(block_rows)
            cols_parts.append(top.ravel())
            value_parts.append(np.take_along_axis(block, top, axis=1).ravel())
        accepted = _greedy_from_candidates(
            np.concatenate(rows_parts), np.concatenate(cols_parts),
            np.concatenate(value_parts), min_similarity, limit,
        )

    pairs = [
        AlignedPair(headline_id=heads[r].record_id, post_id=pool[c].record_id, similarity=value)
        for r, c, value in accepted
    ]
    matched = {r for r, _, _ in accepted}
    unmatched = tuple(heads[r].record_id for r in range(n_rows) if r not in matched)
    report = build_report(pairs, unmatched)
    logger.info("One-to-one alignment: %d pairs, %d unmatched headlines, %s",
                report.pair_count, report.unmatched_headlines, report.describe())
    return pairs, report


def build_report(pairs: Sequence[AlignedPair], unmatched_ids: Sequence[str] = ()) -> AlignmentReport:
    """Summary statistics over emitted pairs."""
    if not pairs:
        return AlignmentReport(0, None, None, None, len(unmatched_ids), tuple(unmatched_ids))
    values = [p.similarity for p in pairs]
    lowest, highest = min(values), max(values)
    mean = min(max(math.fsum(values) / len(values), lowest), highest)
    return AlignmentReport(
        pair_count=len(pairs),
        min_similarity=lowest,
        max_similarity=highest,
        mean_similarity=mean,
        unmatched_headlines=len(unmatched_ids),
        unmatched_ids=tuple(unmatched_ids),
    )
