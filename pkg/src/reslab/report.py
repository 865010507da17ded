"""Plain-text artifacts: ``key: value`` documents, CSV tables, atomic writes."""
from __future__ import annotations

import csv
import io
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .resonances import format_float


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        re, im = format_float(value.real), format_float(value.imag)
        sign = "" if im.startswith("-") else "+"
        return f"{re}{sign}{im}j"
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


def key_value_document(items: Iterable[tuple[str, object]]) -> str:
    return "".join(f"{key}: {format_value(value)}\n" for key, value in items)


def parse_key_value_document(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise ValueError(f"malformed report line {line!r}")
        out[key] = value
    return out


def csv_table(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(path: str | Path | None, text: str) -> None:
    """Write ``text`` to ``path`` atomically (temp file + rename); ``None`` or ``-`` means stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
