"""Delimited and JSON result tables with a metadata header.

CSV files start with ``# key: <json value>`` lines followed by a header row.
Floats are written with ``repr`` so values survive a round trip exactly.
The ``created`` field is the only non-deterministic part of any output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

TIMESTAMP_KEY = "created"


def base_metadata(command: str, **extra) -> dict:
    meta = {"tool": "bdrelay", "version": __version__, "command": command}
    meta.update(extra)
    meta[TIMESTAMP_KEY] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render_table(columns, rows, metadata: dict, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        for key, value in metadata.items():
            buf.write(f"# {key}: {json.dumps(_json_safe(value), sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {"metadata": metadata, "columns": list(columns), "rows": list(rows)}
        return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_text(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse_cell(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def read_table(path):
    """Return ``(metadata, rows)`` from a CSV or JSON table written here."""
    return parse_table(Path(path).read_text())


def parse_table(text: str):
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["metadata"], doc["rows"]
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = json.loads(value)
        elif line:
            body.append(line)
    reader = csv.DictReader(body)
    rows = [{k: _parse_cell(v) for k, v in r.items()} for r in reader]
    return meta, rows


def strip_timestamp(text: str) -> str:
    """Drop the ``created`` field so two outputs can be compared byte for byte."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        doc.get("metadata", {}).pop(TIMESTAMP_KEY, None)
        return json.dumps(doc, indent=2, sort_keys=True)
    return "\n".join(l for l in text.splitlines() if not l.startswith(f"# {TIMESTAMP_KEY}:"))
