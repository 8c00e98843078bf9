"""Reading univariate series from delimited text files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataFormatError

__all__ = ["read_series", "write_series"]


def read_series(
    path,
    column: str | int | None = None,
    delimiter: str = ",",
    header: bool = False,
    diff: bool = False,
) -> np.ndarray:
    """Load one numeric column; non-numeric cells fail with their line number.

    ``column`` selects by zero-based index, or by name when ``header``
    is set; the default is the first column.  ``diff`` returns first
    differences (one observation shorter), for series recorded in
    levels.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        rows = list(reader)
    lineno = 0
    col_idx = 0
    if header:
        if not rows:
            raise DataFormatError(f"{path}: empty file")
        head = [c.strip() for c in rows[0]]
        rows = rows[1:]
        lineno = 1
        if isinstance(column, str):
            if column not in head:
                raise DataFormatError(f"{path}: no column named {column!r}; have {head}")
            col_idx = head.index(column)
        elif column is not None:
            col_idx = int(column)
    elif isinstance(column, str):
        raise DataFormatError("column selection by name requires a header row")
    elif column is not None:
        col_idx = int(column)

    values = []
    for offset, row in enumerate(rows, start=lineno + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if col_idx >= len(row):
            raise DataFormatError(f"{path}:{offset}: row has only {len(row)} columns")
        cell = row[col_idx].strip()
        try:
            values.append(float(cell))
        except ValueError:
            raise DataFormatError(f"{path}:{offset}: non-numeric value {cell!r}") from None
    if not values:
        raise DataFormatError(f"{path}: no numeric observations found")
    series = np.asarray(values, dtype=float)
    if diff:
        if series.size < 2:
            raise DataFormatError(f"{path}: need at least two rows to difference")
        series = np.diff(series)
    return series


def write_series(path, values) -> None:
    arr = np.asarray(values, dtype=float).ravel()
    with Path(path).open("w", newline="") as fh:
        for v in arr:
            fh.write(repr(float(v)) + "\n")
