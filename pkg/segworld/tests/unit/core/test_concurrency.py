import asyncio
import threading
import time
from unittest.mock import AsyncMock, MagicMock

import pytest

from segworld.core.concurrency import ConcurrencyLimiter, map_limited, run_limited


class TestConcurrencyLimiter:
    """Test suite for concurrency limiting functionality."""

    def test_init(self):
        """Test initialization of ConcurrencyLimiter."""
        # Act
        limiter = ConcurrencyLimiter(5)

        # Assert
        assert limiter._sem._value == 5
        assert limiter._sem._bound_value == 5

    @pytest.mark.asyncio
    async def test_context_manager(self):
        """Test ConcurrencyLimiter as a context manager."""
        # Arrange
        limiter = ConcurrencyLimiter(3)
        mock_sem = MagicMock()
        mock_sem.acquire = AsyncMock()
        mock_sem.release = MagicMock()
        limiter._sem = mock_sem

        # Act
        async with limiter:
            pass

        # Assert
        mock_sem.acquire.assert_awaited_once()
        mock_sem.release.assert_called_once()


class TestMapLimited:
    """Test suite for the threaded evaluation map."""

    @pytest.mark.asyncio
    async def test_results_keep_input_order(self):
        """Test that slower early items still come back first."""

        def work(item):
            time.sleep(0.05 * (5 - item))
            return item * item

        # Act
        results = await map_limited(work, [0, 1, 2, 3, 4], max_concurrent=3)

        # Assert
        assert results == [0, 1, 4, 9, 16]

    @pytest.mark.asyncio
    async def test_concurrent_calls_limited(self):
        """Test that at most max_concurrent blocking calls overlap."""
        # Arrange
        lock = threading.Lock()
        counter = 0
        max_counter = 0

        def work(delay):
            nonlocal counter, max_counter
            with lock:
                counter += 1
                max_counter = max(counter, max_counter)
            time.sleep(delay)
            with lock:
                counter -= 1
            return delay

        # Act
        await map_limited(work, [0.1, 0.2, 0.1, 0.2, 0.1], max_concurrent=2)

        # Assert
        assert max_counter <= 2

    def test_run_limited(self):
        assert run_limited(str, [1, 2, 3], max_concurrent=2) == ["1", "2", "3"]

    def test_run_limited_propagates_errors(self):
        def fail(_):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            run_limited(fail, [1], max_concurrent=1)

    def test_empty_input(self):
        assert asyncio.run(map_limited(str, [], max_concurrent=2)) == []
