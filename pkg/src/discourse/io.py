"""File helpers: atomic writes and CSV with round-trippable number formatting."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from datetime import date, datetime
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write(path: str | Path, text: str) -> Path:
    """Write ``text`` (UTF-8, LF) next to ``path`` and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(v) -> str:
    # repr() of a float is the shortest string that round-trips.
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, float):
        v = float(v)  # numpy float64 subclasses float but has its own repr
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return format_value(v.item())
    if isinstance(v, datetime):
        return v.strftime("%Y-%m-%dT%H:%M:%SZ")
    if isinstance(v, date):
        return v.isoformat()
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write(path, csv_text(header, rows))


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_tsv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    lines = ["\t".join(header)]
    lines += ["\t".join(format_value(v) for v in row) for row in rows]
    return atomic_write(path, "\n".join(lines) + "\n")
