from typing import Any

import yaml

from .formatter_interface import FormatterInterface


class YamlFormatter(FormatterInterface):
    """
    Formatter for YAML output.

    This formatter outputs data as a block-style YAML document.
    """

    def format(self, data: Any) -> str:
        return yaml.safe_dump(data, default_flow_style=False, sort_keys=False)
