"""Tidy CSV/JSON table writers with manifest sidecars."""

import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from collections.abc import Mapping, Sequence
from enum import StrEnum
from pathlib import Path
from typing import Any

from qkpc.models.manifest import RunManifest

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9

Record = Mapping[str, Any]


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


def round_value(value: Any) -> Any:
    """Round floats to the serialized precision; other values pass through."""
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return value


def format_value(value: Any) -> str:
    """CSV cell text: 9 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def _json_value(value: Any) -> Any:
    value = round_value(value)
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no inf/nan literals
        return str(value)
    return value


def render_csv(records: Sequence[Record]) -> str:
    """Render records as CSV; columns follow the first record's keys."""
    buffer = io.StringIO()
    if not records:
        return ""
    columns = list(records[0].keys())
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow(format_value(record.get(column)) for column in columns)
    return buffer.getvalue()


def render_json(records: Sequence[Record]) -> str:
    """Render records as a JSON array with the same rounding as the CSV writer."""
    payload = [
        {key: _json_value(value) for key, value in record.items()} for record in records
    ]
    return json.dumps(payload, indent=2) + "\n"


def render(records: Sequence[Record], fmt: OutputFormat) -> str:
    return render_csv(records) if fmt is OutputFormat.CSV else render_json(records)


def manifest_path(path: Path) -> Path:
    """Sidecar manifest location for an output file."""
    return path.with_name(f"{path.name}.manifest.json")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def write_table(
    records: Sequence[Record],
    fmt: OutputFormat,
    manifest: RunManifest,
    path: Path | None = None,
) -> None:
    """
    Write a table to ``path`` (or stdout) together with its manifest.

    Files are written to a temporary sibling and moved into place, so a
    failed run never leaves a partial table behind. The manifest goes to
    ``<path>.manifest.json``; on stdout it is skipped.
    """
    text = render(records, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    _atomic_write(path, text)
    _atomic_write(manifest_path(path), manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Wrote {len(records)} records to {path}")
