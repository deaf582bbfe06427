"""No-op cache implementation."""

import logging
from typing import Any, Optional

from .base_cache import BaseCache

logger = logging.getLogger(__name__)


class NoCache(BaseCache):
    """A no-op cache; used while weights are still changing."""

    def __init__(self):
        logger.debug("Initialized no-op cache (caching disabled)")

    def get(self, key: str) -> Optional[Any]:
        return None

    def set(self, key: str, value: Any) -> None:
        logger.debug(f"No-op cache set for {key} (does nothing)")

    def delete(self, key: str) -> None:
        pass

    def clear(self) -> None:
        pass
