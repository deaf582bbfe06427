import asyncio
import logging
from typing import Awaitable, Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class ConcurrencyLimiter:
    """Limits the number of concurrent operations using a semaphore."""

    def __init__(self, max_concurrent: int):
        """Initialize the concurrency limiter.

        Args:
            max_concurrent: Maximum number of concurrent operations allowed.
        """
        self._sem = asyncio.BoundedSemaphore(max_concurrent)
        logger.debug(f"ConcurrencyLimiter initialized with max_concurrent={max_concurrent}")

    async def __aenter__(self):
        """Acquire the semaphore when entering the context."""
        await self._sem.acquire()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        """Release the semaphore when exiting the context."""
        self._sem.release()


async def map_limited(
    func: Callable[[T], R], items: Sequence[T], max_concurrent: int
) -> List[R]:
    """Run a blocking function over items in worker threads.

    Results come back in input order.
    """
    limiter = ConcurrencyLimiter(max_concurrent)

    async def run(item: T) -> R:
        async with limiter:
            return await asyncio.to_thread(func, item)

    tasks: List[Awaitable[R]] = [run(item) for item in items]
    return list(await asyncio.gather(*tasks))


def run_limited(func: Callable[[T], R], items: Sequence[T], max_concurrent: int) -> List[R]:
    """Synchronous wrapper around map_limited."""
    return asyncio.run(map_limited(func, items, max_concurrent))
