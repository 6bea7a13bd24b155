"""
VAD lexicon and keyword lexicon file loaders.

Lexicon file format::

    # taxonomy=goemotions-28 version=nrc-vad-adapted-1.0
    admiration	0.969	0.583	0.726
    ...

One record per emotion label (label, valence, arousal, dominance), separated by
tabs, commas or spaces. Lines starting with ``#`` other than the header are comments.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Optional, Union

from .errors import OutOfRange, ParseError, TaxonomyMismatch
from .models import VadLexicon, VadVector
from .taxonomy import Taxonomy

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_LEXICON_PATH = DATA_DIR / "vad_lexicon_goemotions.tsv"
DEFAULT_KEYWORDS_PATH = DATA_DIR / "emotion_keywords.tsv"
DEFAULT_TAXONOMY_PATH = DATA_DIR / "taxonomy_goemotions.txt"

_FIELD_SPLIT = re.compile(r"[\t,]\s*|\s+")


def _parse_header(line: str) -> Dict[str, str]:
    pairs = {}
    for token in line.lstrip("#").split():
        key, sep, value = token.partition("=")
        if sep:
            pairs[key.strip()] = value.strip()
    return pairs


def load_lexicon(path: Union[str, Path], taxonomy: Optional[Taxonomy] = None) -> VadLexicon:
    """
    Load a versioned emotion -> VAD lexicon.

    Args:
        path: Lexicon file
        taxonomy: If given, the header must name it and every label must be covered;
            labels outside it are dropped

    Returns:
        VadLexicon: The loaded lexicon

    Raises:
        ParseError: Malformed line, duplicate label or missing header
        OutOfRange: A coordinate outside [0, 1] (message carries the line)
        TaxonomyMismatch: Header names another taxonomy or labels are missing
    """
    path = Path(path)
    header: Dict[str, str] = {}
    entries: Dict[str, VadVector] = {}

    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parsed = _parse_header(line)
                if "taxonomy" in parsed and not header:
                    header = parsed
                continue

            fields = [part for part in _FIELD_SPLIT.split(line) if part]
            if len(fields) != 4:
                raise ParseError(f"Expected 4 fields, got {len(fields)}", str(path), line_number)
            label = fields[0]
            if label in entries:
                raise ParseError(f"Duplicate label {label!r}", str(path), line_number)
            try:
                coords = [float(value) for value in fields[1:]]
            except ValueError:
                raise ParseError(f"Non-numeric coordinate for {label!r}", str(path), line_number) from None
            try:
                entries[label] = VadVector(*coords)
            except OutOfRange as e:
                raise OutOfRange(f"{path}:{line_number}: {e}") from None

    if "taxonomy" not in header or "version" not in header:
        raise ParseError("Missing '# taxonomy=<name> version=<version>' header", str(path))

    lexicon = VadLexicon(entries=entries, taxonomy_name=header["taxonomy"], version=header["version"])

    if taxonomy is not None:
        if lexicon.taxonomy_name != taxonomy.name:
            raise TaxonomyMismatch(
                f"Lexicon declares taxonomy '{lexicon.taxonomy_name}', expected '{taxonomy.name}'"
            )
        missing = lexicon.missing(taxonomy.labels)
        if missing:
            raise TaxonomyMismatch(f"Lexicon {path} misses taxonomy labels {missing}")
        extra = sorted(set(entries) - set(taxonomy.labels))
        if extra:
            logger.warning("Lexicon %s has labels outside the taxonomy, dropping %s", path, extra)
            lexicon = lexicon.subset(taxonomy.labels)

    logger.debug("Loaded lexicon %s (%s, version %s, %d labels)",
                 path, lexicon.taxonomy_name, lexicon.version, len(lexicon))
    return lexicon


def load_keyword_lexicon(path: Union[str, Path], taxonomy: Optional[Taxonomy] = None) -> Dict[str, str]:
    """
    Load the fallback keyword lexicon (token -> emotion label, one pair per line).

    Args:
        path: Keyword file; ``#`` lines are comments
        taxonomy: If given, every target label must belong to it

    Returns:
        Dict[str, str]: Lower-cased token to emotion label
    """
    path = Path(path)
    keywords: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [part for part in _FIELD_SPLIT.split(line) if part]
            if len(fields) != 2:
                raise ParseError(f"Expected 'token label', got {line!r}", str(path), line_number)
            token, label = fields[0].lower(), fields[1]
            if token in keywords and keywords[token] != label:
                raise ParseError(f"Token {token!r} mapped twice", str(path), line_number)
            keywords[token] = label

    if taxonomy is not None:
        taxonomy.check_labels(keywords.values())
    return keywords
