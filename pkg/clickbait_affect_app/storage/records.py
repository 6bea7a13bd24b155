"""
Newline-delimited JSON record files.

This module handles reading, atomically rewriting and appending one-object-per-line
files. Every stage checkpoint, cache and corpus file of the toolkit uses it.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, Union

from ..core.errors import ParseError

logger = logging.getLogger(__name__)

_PATH_LOCKS: Dict[str, threading.Lock] = {}
_PATH_LOCKS_GUARD = threading.Lock()


def _lock_for(path: Path) -> threading.Lock:
    key = str(path.resolve())
    with _PATH_LOCKS_GUARD:
        return _PATH_LOCKS.setdefault(key, threading.Lock())


def dumps_record(record: Dict[str, Any]) -> str:
    """Serialize one record as a single canonical JSON line (no trailing newline)."""
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def file_hash(path: Union[str, Path]) -> Optional[str]:
    """SHA-256 of a file's bytes, or None if it does not exist."""
    path = Path(path)
    if not path.exists():
        return None
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class JsonlStore:
    """
    One newline-delimited JSON file.

    Rewrites go through a temporary file and ``os.replace`` so a crash never
    leaves a half-written checkpoint; appends write one complete line per call
    under a per-path lock.
    """

    def __init__(self, path: Union[str, Path]):
        """
        Initialize the JsonlStore.

        Args:
            path: Path to the .jsonl file
        """
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def iter_records(self, strict: bool = True) -> Iterator[Dict[str, Any]]:
        """
        Iterate over the records of the file.

        Args:
            strict: Raise on a malformed line; otherwise skip it with a warning

        Raises:
            ParseError: Malformed line (strict mode), carrying the line number
        """
        for _, record in self.iter_numbered(strict=strict):
            yield record

    def iter_numbered(self, strict: bool = True) -> Iterator[Tuple[int, Dict[str, Any]]]:
        """Like ``iter_records`` but yields ``(line_number, record)``, 1-based."""
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    if strict:
                        raise ParseError(f"Invalid JSON: {e.msg}", str(self.path), line_number) from None
                    logger.warning("Skipping malformed line %d of '%s'", line_number, self.path)
                    continue
                if not isinstance(record, dict):
                    if strict:
                        raise ParseError("Record is not a JSON object", str(self.path), line_number)
                    continue
                yield line_number, record

    def read(self, strict: bool = True) -> List[Dict[str, Any]]:
        """
        Load every record.

        Returns:
            List[Dict[str, Any]]: Records in file order (empty if the file is missing)
        """
        return list(self.iter_records(strict=strict))

    def write(self, records: Iterable[Dict[str, Any]]) -> str:
        """
        Atomically replace the file with ``records``.

        Returns:
            str: SHA-256 of the written bytes
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = "".join(dumps_record(r) + "\n" for r in records).encode("utf-8")
        fd, tmp_path = tempfile.mkstemp(prefix=self.path.name, suffix=".tmp", dir=str(self.path.parent))
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(payload)
            os.replace(tmp_path, self.path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
        return hashlib.sha256(payload).hexdigest()

    def append(self, record: Dict[str, Any]) -> None:
        """
        Append one record as a single line.

        A torn last line (no trailing newline) is closed first so the new record
        starts on a line of its own.
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        line = dumps_record(record) + "\n"
        with _lock_for(self.path):
            if self._ends_torn():
                line = "\n" + line
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)
                f.flush()

    def _ends_torn(self) -> bool:
        try:
            with open(self.path, "rb") as f:
                f.seek(0, os.SEEK_END)
                if f.tell() == 0:
                    return False
                f.seek(-1, os.SEEK_END)
                return f.read(1) != b"\n"
        except FileNotFoundError:
            return False

    def content_hash(self) -> Optional[str]:
        """SHA-256 of the file, or None if it does not exist."""
        return file_hash(self.path)

    def __repr__(self) -> str:
        return f"JsonlStore(path='{self.path}')"
