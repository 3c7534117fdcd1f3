"""Matrix files: CSV (one row per line) and JSON ``{"rows", "cols", "entries"}``.

Numbers are written with ``repr`` so they round-trip exactly, and parsed with
``float`` so the decimal point never depends on the locale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .norms import as_matrix

__all__ = [
    "MatrixFormatError",
    "parse_matrix_csv",
    "parse_matrix_json",
    "format_matrix_csv",
    "format_matrix_json",
    "read_matrix",
    "write_matrix",
]


class MatrixFormatError(ValueError):
    """Malformed matrix text; ``line``/``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def parse_matrix_csv(text: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.split(",")
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                x = float(cell.strip())
            except ValueError:
                raise MatrixFormatError(f"cannot parse {cell.strip()!r} as a number", lineno, col) from None
            if not np.isfinite(x):
                raise MatrixFormatError(f"non-finite entry {cell.strip()!r}", lineno, col)
            row.append(x)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixFormatError(f"expected {width} columns, got {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise MatrixFormatError("no matrix rows found")
    return np.array(rows, dtype=np.float64)


def parse_matrix_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or not {"rows", "cols", "entries"} <= obj.keys():
        raise MatrixFormatError('expected an object with "rows", "cols" and "entries"')
    m, n, entries = obj["rows"], obj["cols"], obj["entries"]
    if not (isinstance(m, int) and isinstance(n, int)) or m < 1 or n < 1:
        raise MatrixFormatError("rows and cols must be positive integers")
    if not isinstance(entries, list) or len(entries) != m * n:
        raise MatrixFormatError(f"entries must be a list of {m}*{n} numbers")
    try:
        A = np.array(entries, dtype=np.float64).reshape(m, n)
    except (TypeError, ValueError):
        raise MatrixFormatError("entries must be numbers") from None
    if not np.all(np.isfinite(A)):
        raise MatrixFormatError("entries must be finite")
    return A


def format_matrix_csv(A) -> str:
    A = as_matrix(A)
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in A)


def format_matrix_json(A) -> str:
    A = as_matrix(A)
    m, n = A.shape
    return json.dumps({"rows": m, "cols": n, "entries": [float(x) for x in A.ravel()]}) + "\n"


def _fmt_for(path, fmt):
    if fmt:
        return fmt
    return "json" if str(path).lower().endswith(".json") else "csv"


def read_matrix(path, fmt: str | None = None) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    return parse_matrix_json(text) if _fmt_for(path, fmt) == "json" else parse_matrix_csv(text)


def write_matrix(A, path, fmt: str | None = None) -> None:
    text = format_matrix_json(A) if _fmt_for(path, fmt) == "json" else format_matrix_csv(A)
    Path(path).write_text(text, encoding="utf-8")
