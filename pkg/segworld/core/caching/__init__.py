"""Stage-0 context caching."""

from enum import Enum


class CacheType(Enum):
    """Enum for cache types."""

    MEMORY = "memory"
    NO_CACHE = "no_cache"
