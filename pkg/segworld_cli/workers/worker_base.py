import logging
from abc import ABC, abstractmethod

logger = logging.getLogger(__name__)


class Worker(ABC):
    """
    Abstract base class for workers following the Single Responsibility Principle.
    Commands parse arguments and print; workers do the computation and write artifacts.
    """

    @abstractmethod
    def execute(self, *args, **kwargs):
        """
        Execute the worker's task.

        Returns:
            Result of the worker's task
        """
