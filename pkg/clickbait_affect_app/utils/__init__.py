"""Small helpers shared by every package: hashing, id ordering, logging setup."""

from .hashing import canonical_json, content_hash, natural_key, text_hash
from .log import setup_logging

__all__ = [
    'canonical_json',
    'content_hash',
    'natural_key',
    'text_hash',
    'setup_logging',
]
