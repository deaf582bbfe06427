import os
import logging

logger = logging.getLogger(__name__)


class Settings:
    """Process-wide settings read from the environment."""

    # Logging settings
    log_level: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Dataset root used when a relative dataset path is given
    data_dir: str = os.getenv("SEGWORLD_DATA_DIR", "./data")

    # Evaluation concurrency settings
    max_concurrency: int = int(os.getenv("MAX_CONCURRENCY", "4"))

    # Stage-0 context cache
    cache_type: str = os.getenv("CACHE_TYPE", "memory")

    # 0 keeps torch's default intra-op thread count
    torch_num_threads: int = int(os.getenv("TORCH_NUM_THREADS", "0"))

    def resolve_data_path(self, path: str) -> str:
        """Resolve a dataset path against SEGWORLD_DATA_DIR when it is relative."""
        if os.path.isabs(path) or os.path.exists(path):
            return path
        return os.path.join(self.data_dir, path)


settings = Settings()

logger.debug(
    f"Settings loaded: log_level={settings.log_level}, data_dir={settings.data_dir}, "
    f"max_concurrency={settings.max_concurrency}, cache_type={settings.cache_type}"
)
