"""
Output Generation for the Rivlin cube toolkit.

This module writes CSV and JSON data files and the HTML verification report
with failed checks highlighted.
"""

import io
import json
import logging
import math
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd
from bs4 import BeautifulSoup

from core.utils import ensure_parent_directory, format_float

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    """Render one CSV cell; bools become 0/1 and floats use round-trip formatting."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else format_float(value)
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if hasattr(value, "value"):
        return value.value
    return value


class OutputGenerator:
    """Handles CSV/JSON serialisation and HTML report generation."""

    def __init__(self, settings):
        self.settings = settings

    def write_csv(
        self,
        rows: Iterable[Dict[str, Any]],
        columns: Sequence[str],
        meta: Optional[Dict[str, Any]] = None,
        path: Optional[str] = None,
    ) -> str:
        """
        Write rows as CSV with '#'-prefixed metadata lines and a header row.

        Args:
            rows: one dict per record, keyed by column name
            columns: column order
            meta: metadata written as '# key=value' lines before the header
            path: destination file; stdout when None

        Returns:
            The CSV text
        """
        buffer = io.StringIO()
        for key, value in (meta or {}).items():
            if isinstance(value, (list, tuple)):
                value = ",".join(_cell(v) for v in value)
            buffer.write(f"# {key}={_cell(value)}\n")
        # cells are pre-rendered so pandas writes them verbatim
        table = pd.DataFrame([[_cell(row[column]) for column in columns] for row in rows], columns=list(columns))
        table.to_csv(buffer, index=False, lineterminator="\n")
        text = buffer.getvalue()
        self._emit(text, path)
        return text

    def write_json(
        self,
        meta: Dict[str, Any],
        data: List[Dict[str, Any]],
        path: Optional[str] = None,
    ) -> str:
        """Write {"meta": ..., "data": [...]} as JSON."""
        document = {"meta": _json_value(meta), "data": _json_value(data)}
        text = json.dumps(document, indent=2, allow_nan=False) + "\n"
        self._emit(text, path)
        return text

    def write(self, fmt: str, rows, columns, meta, path=None) -> str:
        """Dispatch on output format."""
        if fmt == "json":
            return self.write_json(meta, [{column: row[column] for column in columns} for row in rows], path)
        return self.write_csv(rows, columns, meta, path)

    def _emit(self, text: str, path: Optional[str]):
        if path is None:
            sys.stdout.write(text)
            return
        ensure_parent_directory(path)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info("wrote %s", path)

    def generate_html_report(self, checks: Sequence[Dict[str, Any]], title: str = None, meta: Dict[str, Any] = None) -> str:
        """
        Generate HTML table of verification checks.

        Args:
            checks: dicts with name, passed, worst, threshold, detail
            title: Optional title for the report
            meta: run parameters listed above the table

        Returns:
            HTML string
        """
        title_section = f"<h2>{title}</h2>" if title else ""
        meta_section = ""
        if meta:
            items = "".join(f"<li>{key}: {_cell(value)}</li>" for key, value in meta.items())
            meta_section = f"<ul>{items}</ul>"

        table_rows = ""
        for check in checks:
            status = "PASS" if check["passed"] else "FAIL"
            table_rows += "<tr>"
            table_rows += f'<td class="check-name">{check["name"]}</td>'
            table_rows += f'<td class="status">{status}</td>'
            table_rows += f"<td>{_cell(float(check['worst']))}</td>"
            table_rows += f"<td>{_cell(float(check['threshold']))}</td>"
            table_rows += f"<td>{check.get('detail', '')}</td>"
            table_rows += "</tr>"

        return self._get_html_template().format(
            title_section=title_section,
            meta_section=meta_section,
            table_rows=table_rows,
        )

    def _get_html_template(self) -> str:
        """Get the base HTML template."""
        return """
        <html>
        <head>
            <title>Rivlin Cube Verification Report</title>
            <style>
                body {{
                    font-family: Arial, sans-serif;
                    margin: 20px;
                    line-height: 1.6;
                }}
                table {{
                    border-collapse: collapse;
                    width: 100%;
                    margin-top: 20px;
                }}
                th, td {{
                    border: 1px solid #ddd;
                    padding: 8px;
                    text-align: left;
                    vertical-align: top;
                }}
                th {{
                    background-color: #f2f2f2;
                    font-weight: bold;
                }}
                tr.failed {{
                    background-color: #fdecea;
                }}
                mark {{
                    background-color: #ffeb3b;
                    padding: 2px 4px;
                    border-radius: 3px;
                }}
                h2 {{
                    color: #333;
                    border-bottom: 2px solid #007acc;
                    padding-bottom: 5px;
                }}
            </style>
        </head>
        <body>
            {title_section}
            {meta_section}
            <table>
                <tr>
                    <th>Check</th>
                    <th>Result</th>
                    <th>Worst value</th>
                    <th>Threshold</th>
                    <th>Detail</th>
                </tr>
                {table_rows}
            </table>
        </body>
        </html>
        """

    def highlight_failures(self, html_content: str) -> str:
        """
        Mark every failed check row.

        Args:
            html_content: HTML produced by generate_html_report

        Returns:
            HTML with failed rows classed and their status wrapped in <mark>
        """
        soup = BeautifulSoup(html_content, "lxml")
        for row in soup.find_all("tr")[1:]:  # Skip header row
            status = row.find("td", class_="status")
            if status is None or status.get_text(strip=True) != "FAIL":
                continue
            row["class"] = row.get("class", []) + ["failed"]
            mark = soup.new_tag("mark")
            mark.string = status.get_text(strip=True)
            status.clear()
            status.append(mark)
        return str(soup)

    def save_html_report(self, checks: Sequence[Dict[str, Any]], path: str, title: str = None, meta: Dict[str, Any] = None) -> str:
        """Render the report, highlight failed checks and write it to path."""
        html = self.highlight_failures(self.generate_html_report(checks, title, meta))
        self._emit(html, path)
        return html
