"""Cache factory to create the appropriate cache implementation."""

import logging

from ..settings import Settings
from . import CacheType
from .base_cache import BaseCache
from .memory_cache import MemoryCache
from .no_cache import NoCache

logger = logging.getLogger(__name__)


class CacheFactory:
    """Factory class for creating cache instances."""

    @staticmethod
    def create_cache(settings: Settings) -> BaseCache:
        """
        Create a cache instance based on settings.

        Args:
            settings: Process settings

        Returns:
            A cache instance
        """
        cache_type = getattr(settings, "cache_type", CacheType.MEMORY.value)

        if cache_type == CacheType.NO_CACHE.value:
            logger.info("Creating no-cache implementation (context caching disabled)")
            return NoCache()
        if cache_type != CacheType.MEMORY.value:
            logger.warning(f"Unknown cache type {cache_type!r}, using in-memory cache")
        return MemoryCache()
