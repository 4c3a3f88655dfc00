"""Plain numeric CSV in and out."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np


class CSVError(ValueError):
    pass


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_matrix(path: str | Path) -> np.ndarray:
    """Read an n x d numeric CSV; a non-numeric first line is taken as a header."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CSVError(f"cannot read {path}: {exc.strerror or exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise CSVError(f"{path} contains no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CSVError(f"{path}: row {i + 1} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise CSVError(f"{path}: non-numeric cell {cell!r} at row {i + 1}, column {j + 1}") from None
    if not np.all(np.isfinite(out)):
        raise CSVError(f"{path} contains non-finite values")
    return out


def format_matrix(M: np.ndarray) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def write_matrix(path: str | Path, M: np.ndarray) -> None:
    Path(path).write_text(format_matrix(M))
