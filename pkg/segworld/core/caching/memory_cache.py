"""Bounded in-memory cache."""

import logging
import threading
from collections import OrderedDict
from typing import Any, Optional

from .base_cache import BaseCache

logger = logging.getLogger(__name__)


class MemoryCache(BaseCache):
    """
    In-memory least-recently-used cache.

    Thread safe: evaluation workers share one engine and therefore one cache.
    """

    def __init__(self, max_entries: int = 4096):
        self._cache: "OrderedDict[str, Any]" = OrderedDict()
        self._max_entries = max_entries
        self._lock = threading.RLock()
        logger.debug(f"Initialized in-memory cache (max_entries={max_entries})")

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            if key not in self._cache:
                return None
            self._cache.move_to_end(key)
            return self._cache[key]

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            self._cache[key] = value
            self._cache.move_to_end(key)
            while len(self._cache) > self._max_entries:
                evicted, _ = self._cache.popitem(last=False)
                logger.debug(f"Evicted {evicted} from cache")

    def delete(self, key: str) -> None:
        with self._lock:
            self._cache.pop(key, None)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)
