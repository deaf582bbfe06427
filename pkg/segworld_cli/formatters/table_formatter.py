import io
from typing import Any, Dict, List

from rich.console import Console
from rich.table import Table

from .formatter_interface import FormatterInterface


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    if isinstance(value, dict):
        return f"[Dictionary: {len(value)} items]"
    if isinstance(value, list):
        return f"[List: {len(value)} items]"
    if value is None:
        return ""
    return str(value)


class TableFormatter(FormatterInterface):
    """
    Formatter for tabular output using Rich library.
    Lists of dictionaries become one row per item; a dictionary becomes a
    property/value table.
    """

    def format(self, data: Any) -> str:
        string_io = io.StringIO()
        console = Console(file=string_io, width=100)

        if isinstance(data, list) and data and isinstance(data[0], dict):
            console.print(self._format_list_of_dicts(data))
        elif isinstance(data, dict):
            console.print(self._format_dict_as_table(data))
        else:
            console.print(str(data))

        return string_io.getvalue()

    def _format_list_of_dicts(self, data_list: List[Dict[str, Any]]) -> Table:
        table = Table(show_header=True, header_style="bold")
        keys = list(data_list[0].keys())
        for key in keys:
            table.add_column(key.replace("_", " ").title())
        for item in data_list:
            table.add_row(*(_cell(item.get(key)) for key in keys))
        return table

    def _format_dict_as_table(self, data: Dict[str, Any]) -> Table:
        table = Table(show_header=True, header_style="bold")
        table.add_column("Property")
        table.add_column("Value")
        for key, value in data.items():
            table.add_row(key.replace("_", " ").title(), _cell(value))
        return table
