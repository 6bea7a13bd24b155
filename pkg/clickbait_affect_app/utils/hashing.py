"""
Content hashing and id ordering helpers.
"""

import hashlib
import json
import re
from typing import Any, Tuple, Union

_DIGITS = re.compile(r"(\d+)")


def canonical_json(value: Any) -> str:
    """Serialize a JSON-compatible value with sorted keys and no whitespace."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def text_hash(text: str) -> str:
    """SHA-256 hex digest of a UTF-8 string."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def content_hash(value: Union[bytes, str, Any]) -> str:
    """
    SHA-256 hex digest of bytes, a string, or any JSON-compatible value.

    Args:
        value: Bytes are hashed as-is, strings as UTF-8, everything else as canonical JSON

    Returns:
        str: 64-character hex digest
    """
    if isinstance(value, bytes):
        return hashlib.sha256(value).hexdigest()
    if isinstance(value, str):
        return text_hash(value)
    return text_hash(canonical_json(value))


def natural_key(record_id: str) -> Tuple:
    """
    Sort key comparing digit runs numerically ("p2" < "p10").

    The split always alternates text and digit chunks, so keys of different ids
    compare position by position without mixing types.
    """
    parts = _DIGITS.split(str(record_id))
    return tuple(int(part) if i % 2 else part for i, part in enumerate(parts))
