import json
import numbers
from typing import Any, Dict, List

import pandas as pd
from tabulate import tabulate


def format_report(report: Dict[str, Any], fmt: str = "text") -> str:
    """
    Render a command report.

    Args:
        report: dict with ``command``, ``header`` and any of ``verdict``,
            ``summary``, ``rows``, ``page``, ``notes``
        fmt: "text" or "json"

    Returns:
        The rendered report; identical input gives identical output.
    """
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2, sort_keys=True)
    return _format_text(report)


def render_header(header: Dict[str, Any]) -> str:
    return "  ".join(f"{k}={_format_simple(v)}" for k, v in header.items())


def render_table(rows: List[Dict[str, Any]]) -> str:
    if not rows:
        return "(no rows)"
    frame = pd.DataFrame([{k: _format_simple(v) for k, v in row.items()} for row in rows])
    return tabulate(frame, headers="keys", tablefmt="simple", showindex=False, stralign="left")


def _format_text(report: Dict[str, Any]) -> str:
    lines = [f"# {report['command']}", render_header(report["header"])]
    if "verdict" in report:
        lines.append(f"verdict: {_format_simple(report['verdict'])}")
    for key, value in report.get("summary", {}).items():
        lines.append(f"{key}: {_format_simple(value)}")
    if report.get("rows") is not None:
        lines.extend(["", render_table(report["rows"])])
    if report.get("page"):
        lines.extend(["", report["page"]])
    for note in report.get("notes", []):
        lines.append(f"note: {note}")
    return "\n".join(lines)


def _format_simple(result: Any) -> str:
    """Plain text for one value."""
    if isinstance(result, bool):
        return "yes" if result else "no"
    if isinstance(result, numbers.Integral):
        return str(int(result))
    if isinstance(result, (list, tuple)):
        return ", ".join(map(_format_simple, result)) if result else "-"
    if isinstance(result, dict):
        return ", ".join(f"{k}={_format_simple(v)}" for k, v in result.items())
    if result is None:
        return "-"
    return str(result)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    return str(value)
