from .csv_formatter import CsvFormatter
from .formatter_interface import FormatterFactory, FormatterInterface
from .json_formatter import JsonFormatter
from .table_formatter import TableFormatter
from .yaml_formatter import YamlFormatter

formatter_factory = FormatterFactory()
formatter_factory.register_formatter("table", TableFormatter)
formatter_factory.register_formatter("json", JsonFormatter)
formatter_factory.register_formatter("yaml", YamlFormatter)
formatter_factory.register_formatter("csv", CsvFormatter)

DEFAULT_FORMATTER = "table"


def get_formatter(format_type: str = None) -> FormatterInterface:
    """
    Get a formatter for the specified format type.

    Raises:
        ValueError: If the format type is not registered
    """
    if format_type is None:
        format_type = DEFAULT_FORMATTER
    return formatter_factory.create_formatter(format_type)


def get_available_formats() -> list:
    return formatter_factory.get_available_formats()
