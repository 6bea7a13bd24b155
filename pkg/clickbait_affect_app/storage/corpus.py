"""
Corpus loaders.

This module maps newline-delimited JSON corpora (clickbait headlines, social
posts, external detector predictions) onto the toolkit's records through a
configurable field mapping.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.errors import MissingField, ParseError, ToolkitError
from ..core.models import HeadlineRecord, PostRecord, PredictionRecord
from .records import JsonlStore

logger = logging.getLogger(__name__)

DEFAULT_REMOVED_MARKERS = ("[removed]", "[deleted]")

# Class strings accepted as a headline label
_CLASS_SCORES = {
    "clickbait": 1.0,
    "1": 1.0,
    "non-clickbait": 0.0,
    "no-clickbait": 0.0,
    "not-clickbait": 0.0,
    "0": 0.0,
}


@dataclass(frozen=True)
class FieldMapping:
    """
    Names of the source fields that feed each record attribute.

    Headline corpora use ``id``/``text``/``label``; post corpora use
    ``id``/``title``/``body``/``source``. The defaults follow the Clickbait
    Challenge and Pushshift dumps.
    """
    id: str = "id"
    text: str = "postText"
    label: str = "truthMean"
    title: str = "title"
    body: str = "selftext"
    source: str = "subreddit"

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'FieldMapping':
        unknown = set(data) - set(FieldMapping.__dataclass_fields__)
        if unknown:
            raise ValueError(f"Unknown field mapping keys: {sorted(unknown)}")
        return FieldMapping(**{k: str(v) for k, v in data.items()})

    def to_dict(self) -> dict:
        return {
            "id": self.id, "text": self.text, "label": self.label,
            "title": self.title, "body": self.body, "source": self.source,
        }


@dataclass(frozen=True)
class IngestCounts:
    """Raw records read and records kept by the validity filter."""
    read: int
    kept: int

    def to_dict(self) -> dict:
        return {"read": self.read, "kept": self.kept}


def _as_text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return " ".join(str(part).strip() for part in value if str(part).strip())
    return str(value)


def _require(record: Mapping[str, Any], field_name: str, path: Path, line_number: int) -> Any:
    if field_name not in record:
        raise MissingField(f"Missing field '{field_name}'", str(path), line_number)
    return record[field_name]


def _label_score(value: Any, path: Path, line_number: int) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        return float(value)
    key = str(value).strip().lower()
    if key in _CLASS_SCORES:
        return _CLASS_SCORES[key]
    try:
        return float(key)
    except ValueError:
        raise ParseError(f"Unrecognized label {value!r}", str(path), line_number) from None


def ingest_headlines(
    path: Union[str, Path],
    mapping: Optional[FieldMapping] = None,
    clickbait_only: bool = False,
    threshold: float = 0.5,
) -> List[HeadlineRecord]:
    """
    Load a headline corpus.

    Args:
        path: Newline-delimited JSON file
        mapping: Field mapping (defaults to the Clickbait Challenge layout)
        clickbait_only: Keep only headlines whose score reaches ``threshold``
        threshold: Binarization threshold for the label score

    Returns:
        List[HeadlineRecord]: Records in file order

    Raises:
        ParseError: Malformed line, bad label, empty text or duplicate id (with line number)
        MissingField: A mapped field is absent
    """
    mapping = mapping or FieldMapping()
    path = Path(path)
    headlines: List[HeadlineRecord] = []
    seen = set()
    for line_number, raw in JsonlStore(path).iter_numbered():
        record_id = _as_text(_require(raw, mapping.id, path, line_number))
        text = _as_text(_require(raw, mapping.text, path, line_number)).strip()
        score = _label_score(_require(raw, mapping.label, path, line_number), path, line_number)
        if record_id in seen:
            raise ParseError(f"Duplicate headline id '{record_id}'", str(path), line_number)
        seen.add(record_id)
        try:
            headline = HeadlineRecord(record_id, text, score, score >= threshold)
        except ToolkitError as e:
            raise ParseError(str(e), str(path), line_number) from e
        if clickbait_only and not headline.is_clickbait:
            continue
        headlines.append(headline)

    logger.info("Ingested %d headlines from %s", len(headlines), path)
    return headlines


def ingest_posts(
    path: Union[str, Path],
    mapping: Optional[FieldMapping] = None,
    limit: Optional[int] = None,
    removed_markers: Sequence[str] = DEFAULT_REMOVED_MARKERS,
) -> Tuple[List[PostRecord], IngestCounts]:
    """
    Load a post corpus.

    The first ``limit`` raw records are read, then the validity filter (title or
    body non-empty after trimming, removal markers counting as blank) is applied.

    Returns:
        Tuple[List[PostRecord], IngestCounts]: Valid posts in file order and the read/kept counts

    Raises:
        ParseError: Malformed line or duplicate id (with line number)
        MissingField: The id field is absent
    """
    mapping = mapping or FieldMapping()
    path = Path(path)
    markers = {m.strip().lower() for m in removed_markers}
    posts: List[PostRecord] = []
    seen = set()
    read = 0

    def clean(value: Any) -> str:
        text = _as_text(value).strip()
        return "" if text.lower() in markers else text

    for line_number, raw in JsonlStore(path).iter_numbered():
        if limit is not None and read >= limit:
            break
        read += 1
        record_id = _as_text(_require(raw, mapping.id, path, line_number))
        if record_id in seen:
            raise ParseError(f"Duplicate post id '{record_id}'", str(path), line_number)
        seen.add(record_id)
        title = clean(raw.get(mapping.title))
        body = clean(raw.get(mapping.body))
        if not title and not body:
            continue
        posts.append(PostRecord(record_id, title, body, _as_text(raw.get(mapping.source))))

    counts = IngestCounts(read=read, kept=len(posts))
    logger.info("Ingested posts from %s: read=%d kept=%d", path, counts.read, counts.kept)
    return posts, counts


def load_predictions(path: Union[str, Path]) -> List[PredictionRecord]:
    """
    Load external detector predictions.

    Each line carries ``text_id``, ``style``, ``true_label``, ``predicted_label``
    and ``classifier_id``.

    Raises:
        MissingField: A required field is absent
        ParseError: A value is invalid (with line number)
    """
    path = Path(path)
    predictions: List[PredictionRecord] = []
    for line_number, raw in JsonlStore(path).iter_numbered():
        for name in ("text_id", "style", "true_label", "predicted_label", "classifier_id"):
            _require(raw, name, path, line_number)
        try:
            predictions.append(PredictionRecord.from_dict(raw))
        except ToolkitError as e:
            raise ParseError(str(e), str(path), line_number) from e
    logger.info("Loaded %d predictions from %s", len(predictions), path)
    return predictions
