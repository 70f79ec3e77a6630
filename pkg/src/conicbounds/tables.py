"""CSV round-tripping for result tables.

Floats are written with 17 significant digits so that parsing a file
reproduces the in-memory values exactly; comma delimiter, LF endings.
"""
import csv
import io
import math
from dataclasses import fields

from .montecarlo import ValidationRow


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns):
    text = rows_to_csv(rows, columns)
    if path in (None, "-"):
        import sys
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    return text


def write_validation_rows(path, rows):
    return write_csv(path, [r.as_dict() for r in rows], ValidationRow.field_names())


def _parse(text, typ):
    if typ is int:
        return int(text)
    if typ is float:
        return float(text)
    if typ is bool:
        return text == "true"
    return text


def read_validation_rows(path_or_text):
    """Parse a ValidationRow CSV (a path, or the CSV text itself if it has a newline)."""
    if "\n" in path_or_text:
        lines = io.StringIO(path_or_text)
    else:
        lines = open(path_or_text, newline="", encoding="utf-8")
    with lines:
        reader = csv.DictReader(lines)
        types = {f.name: f.type for f in fields(ValidationRow)}
        types = {k: {"int": int, "float": float, "str": str}.get(v, v) if isinstance(v, str) else v
                 for k, v in types.items()}
        return [ValidationRow(**{k: _parse(v, types[k]) for k, v in rec.items()})
                for rec in reader]
