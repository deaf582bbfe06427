import csv
import io
from typing import Any, Dict, List

from .formatter_interface import FormatterInterface


def rows_of(data: Any) -> List[Dict[str, Any]]:
    """Normalize a dict or a list of dicts into rows."""
    if isinstance(data, dict):
        return [data]
    if isinstance(data, list):
        return [row if isinstance(row, dict) else {"value": row} for row in data]
    return [{"value": data}]


class CsvFormatter(FormatterInterface):
    """Comma-separated rows; columns follow the first row, nested values are JSON-ish strings."""

    def format(self, data: Any) -> str:
        rows = rows_of(data)
        if not rows:
            return ""
        columns = list(rows[0].keys())
        for row in rows[1:]:
            columns.extend(key for key in row if key not in columns)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: row.get(key, "") for key in columns})
        return buffer.getvalue()
