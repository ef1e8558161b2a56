"""CSV / JSON emission of trial records."""
import csv
import io
import json
import math
import sys
from pathlib import Path

from ..errors import BeamcombError, InputError

COLUMNS = ("trial", "seed", "scheme", "M", "L", "K", "B", "snr_db", "eta", "eta_opt", "nodes", "ms")
FORMATS = ("csv", "json")


class ReportError(BeamcombError, OSError):
    pass


def _cell(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def render(records, fmt="csv"):
    if not records:
        raise InputError("no records to report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        rows = []
        for r in records:
            row = {c: getattr(r, c) for c in COLUMNS}
            for c in ("eta", "eta_opt"):
                if math.isnan(row[c]):
                    row[c] = None
            rows.append(row)
        return json.dumps(rows, indent=1) + "\n"
    raise InputError(f"unknown format {fmt!r}; choose from {FORMATS}")


def emit_report(records, path, fmt="csv"):
    """Write the records to ``path`` (``-`` or None for stdout)."""
    text = render(records, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return None
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc
    return path
