import json
from typing import Any

from .formatter_interface import FormatterInterface


class JsonFormatter(FormatterInterface):
    """Indented JSON with sorted keys, so equal data prints identically."""

    def format(self, data: Any) -> str:
        return json.dumps(data, indent=2, sort_keys=True, default=str)
