"""
Run manifest module for JSON-based persistence.

This module handles loading and saving the run manifest: per-stage status,
artifact hashes, input fingerprints, counts, timings, versions and the backend
call log of a pipeline run.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)


class RunManifest:
    """
    Manages the JSON manifest of one pipeline run.

    Structure of the stored data:
        {
            "config_hash": str,
            "seed": int,
            "versions": {"lexicon": str, "templates": str, ...},
            "host": {"cpu_count": int, "memory_total": int},
            "stages": {
                "<stage>": {
                    "status": "complete" | "failed",
                    "fingerprint": str,
                    "artifacts": {"<file>": "<sha256>"},
                    "counts": {...},
                    "seconds": float,
                    "error": str
                }
            },
            "call_log": [...]
        }
    """

    DEFAULT_FILE = "run_manifest.json"

    def __init__(self, path: Union[str, Path, None] = None):
        """
        Initialize the RunManifest.

        Args:
            path: Path to the manifest JSON file. If None, uses DEFAULT_FILE
        """
        self.path = Path(path if path else self.DEFAULT_FILE)
        self.data: Dict[str, Any] = {}

    def load(self) -> Dict[str, Any]:
        """
        Load the manifest from disk.

        A missing or corrupted file yields an empty manifest, which makes every
        stage run again.

        Returns:
            Dict[str, Any]: The loaded manifest contents
        """
        if not self.path.exists():
            logger.debug("Manifest '%s' does not exist, starting empty.", self.path)
            self.data = {}
            return self.data

        try:
            with open(self.path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
            self.data = loaded if isinstance(loaded, dict) else {}
        except (json.JSONDecodeError, OSError) as e:
            logger.warning("Manifest '%s' is unreadable (%s), starting empty.", self.path, e)
            self.data = {}
        return self.data

    def save(self, data: Optional[Dict[str, Any]] = None) -> bool:
        """
        Save the manifest to disk.

        Args:
            data: Data to save. If None, saves self.data

        Returns:
            bool: True if save was successful, False otherwise
        """
        if data is not None:
            self.data = data

        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(self.data, f, indent=4, ensure_ascii=False, sort_keys=True)
            tmp.replace(self.path)
            return True
        except OSError as e:
            logger.error("Error saving manifest to '%s': %s", self.path, e)
            return False

    def get(self, key: str, default: Any = None) -> Any:
        return self.data.get(key, default)

    def set(self, key: str, value: Any, auto_save: bool = True) -> bool:
        """
        Set a top-level value.

        Args:
            key: Key to set
            value: Value to store
            auto_save: If True, automatically save to disk after setting
        """
        self.data[key] = value
        if auto_save:
            return self.save()
        return True

    def update(self, updates: Dict[str, Any], auto_save: bool = True) -> bool:
        """Update several top-level keys at once."""
        self.data.update(updates)
        if auto_save:
            return self.save()
        return True

    # ==================== Stages ====================

    def stage(self, name: str) -> Dict[str, Any]:
        """Stage entry (empty dict if the stage never ran)."""
        return dict(self.data.get("stages", {}).get(name, {}))

    def set_stage(self, name: str, entry: Dict[str, Any], auto_save: bool = True) -> bool:
        self.data.setdefault("stages", {})[name] = entry
        if auto_save:
            return self.save()
        return True

    def clear_stage(self, name: str, auto_save: bool = True) -> bool:
        """
        Forget a stage.

        Returns:
            bool: True if the stage existed
        """
        stages = self.data.get("stages", {})
        if name not in stages:
            return False
        del stages[name]
        if auto_save:
            self.save()
        return True

    def is_complete(self, name: str) -> bool:
        return self.stage(name).get("status") == "complete"

    def __repr__(self) -> str:
        return f"RunManifest(path='{self.path}', stages={list(self.data.get('stages', {}))})"
