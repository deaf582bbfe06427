from types import SimpleNamespace
from unittest.mock import MagicMock, patch

from segworld.core.caching import CacheType
from segworld.core.caching.base_cache import BaseCache
from segworld.core.caching.factory import CacheFactory
from segworld.core.caching.memory_cache import MemoryCache
from segworld.core.caching.no_cache import NoCache


class TestCaching:
    """Test suite for caching functionality."""

    def test_cache_type_enum(self):
        """Test that CacheType enum has expected values."""
        assert CacheType.MEMORY.value == "memory"
        assert CacheType.NO_CACHE.value == "no_cache"

    @patch("segworld.core.caching.factory.MemoryCache")
    def test_create_memory_cache(self, mock_memory_cache):
        """Test creation of memory cache."""
        # Arrange
        mock_instance = MagicMock(spec=BaseCache)
        mock_memory_cache.return_value = mock_instance

        # Act
        result = CacheFactory.create_cache(SimpleNamespace(cache_type="memory"))

        # Assert
        assert result == mock_instance
        mock_memory_cache.assert_called_once_with()

    @patch("segworld.core.caching.factory.NoCache")
    def test_create_no_cache(self, mock_no_cache):
        """Test creation of no-cache implementation."""
        # Arrange
        mock_instance = MagicMock(spec=BaseCache)
        mock_no_cache.return_value = mock_instance

        # Act
        result = CacheFactory.create_cache(SimpleNamespace(cache_type="no_cache"))

        # Assert
        assert result == mock_instance
        mock_no_cache.assert_called_once_with()

    def test_unknown_cache_type_falls_back_to_memory(self):
        """Test that an unknown cache type logs a warning and uses memory."""
        with patch("segworld.core.caching.factory.logger") as mock_logger:
            result = CacheFactory.create_cache(SimpleNamespace(cache_type="redis"))

        assert isinstance(result, MemoryCache)
        mock_logger.warning.assert_called_once()

    def test_missing_setting_defaults_to_memory(self):
        assert isinstance(CacheFactory.create_cache(object()), MemoryCache)


class TestMemoryCache:
    """Test suite for the LRU memory cache."""

    def test_get_set_delete(self):
        cache = MemoryCache()

        cache.set("a", 1)
        assert cache.get("a") == 1
        cache.delete("a")
        assert cache.get("a") is None
        cache.delete("a")

    def test_least_recently_used_evicted(self):
        cache = MemoryCache(max_entries=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")

        cache.set("c", 3)

        assert len(cache) == 2
        assert cache.get("b") is None
        assert cache.get("a") == 1

    def test_clear(self):
        cache = MemoryCache()
        cache.set("a", 1)

        cache.clear()

        assert len(cache) == 0


class TestNoCache:
    def test_never_stores(self):
        cache = NoCache()

        cache.set("a", 1)

        assert cache.get("a") is None
        assert len(cache) == 0
