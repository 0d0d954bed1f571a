"""
Known-sample cache.

A JSON object keyed by sha256 holding the malicious probability of samples
already classified. Cached samples skip encoding and inference; the verdict
is recomputed from the stored probability with the current threshold.
"""

import json
import os
import threading
from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import ValidationError

from r2d2.exceptions import CacheError
from r2d2.models import KnownSample
from r2d2.observability import logger


class KnownSampleCache:
    """JSON-file backed sha256 -> KnownSample map."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._entries: Dict[str, KnownSample] = {}
        self._lock = threading.Lock()
        self._dirty = False
        self.load()

    def load(self):
        """
        Load entries from disk; a missing file means an empty cache.

        Raises:
            CacheError: If the file is not a valid cache
        """
        if not self.path.exists():
            return
        try:
            raw = json.loads(self.path.read_text())
            if not isinstance(raw, dict):
                raise CacheError(f"{self.path}: cache must be a JSON object")
            self._entries = {
                sha: KnownSample(sha256=sha, **entry) for sha, entry in raw.items()
            }
        except (OSError, UnicodeDecodeError, json.JSONDecodeError, ValidationError, TypeError) as e:
            raise CacheError(f"Cannot load cache {self.path}: {e}") from e
        logger.debug("cache_loaded", path=str(self.path), entries=len(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, sha256: str) -> bool:
        return sha256 in self._entries

    def get(self, sha256: str) -> Optional[KnownSample]:
        with self._lock:
            return self._entries.get(sha256)

    def put(self, sample: KnownSample):
        """Record a sample; the first sighting's path is kept."""
        with self._lock:
            if sample.sha256 in self._entries:
                return
            self._entries[sample.sha256] = sample
            self._dirty = True

    def save(self):
        """Write the cache atomically if it changed."""
        if not self._dirty:
            return
        data = {
            sha: entry.model_dump(exclude={"sha256"})
            for sha, entry in sorted(self._entries.items())
        }
        tmp = self.path.with_name(self.path.name + ".tmp")
        try:
            tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
            os.replace(tmp, self.path)
        except OSError as e:
            raise CacheError(f"Cannot write cache {self.path}: {e}") from e
        self._dirty = False
        logger.debug("cache_saved", path=str(self.path), entries=len(self._entries))
