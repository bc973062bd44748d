"""CSV/JSON emission with lossless number formatting and atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = ["format_number", "atomic_write", "csv_text", "write_csv", "read_csv", "write_json"]


def format_number(v) -> str:
    """17 significant digits: enough to reproduce any double exactly."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    if hasattr(v, "dtype"):
        return format_number(v.item())
    return str(v)


def atomic_write(path: str | os.PathLike, data: str | bytes) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        os.chmod(tmp, 0o644)
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Mapping | Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        values = [row[k] for k in header] if isinstance(row, Mapping) else row
        w.writerow([format_number(v) for v in values])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Mapping | Sequence]) -> Path:
    return atomic_write(path, csv_text(header, rows))


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Header and rows; numeric cells come back as int or float."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return [], []
        rows = [dict(zip(header, map(_parse_cell, r))) for r in reader]
    return header, rows


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return format_number(v) if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_json(path, obj) -> Path:
    # json.dumps uses repr for floats, which already round-trips exactly
    return atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
