"""Base cache interface for all cache implementations."""

from abc import ABC, abstractmethod
from typing import Any, Optional


class BaseCache(ABC):
    """Abstract base class defining the interface for all cache implementations."""

    @abstractmethod
    def get(self, key: str) -> Optional[Any]:
        """
        Get a value from the cache.

        Args:
            key: The cache key

        Returns:
            The cached value or None if not found
        """

    @abstractmethod
    def set(self, key: str, value: Any) -> None:
        """
        Store a value in the cache.

        Args:
            key: The cache key
            value: The value to cache
        """

    @abstractmethod
    def delete(self, key: str) -> None:
        """Delete a value from the cache."""

    @abstractmethod
    def clear(self) -> None:
        """Clear all values from the cache."""

    def __len__(self) -> int:
        return 0
