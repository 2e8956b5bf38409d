"""CSV/JSON artifact loading with strict column checking.

The tables come from the simulator's batch front end: a header line, comma
separated cells, floats written with 17 significant digits, empty cells for
missing values, "true"/"false" for booleans.  Values are kept as the parsed
Python floats so a rendered series is bit-identical to the file content.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class TableError(ValueError):
    """A data table cannot be used as figure input."""


class EmptyTableError(TableError):
    """The CSV has no data rows."""


class MissingColumnError(TableError):
    """A documented column is absent; the message names it."""

    def __init__(self, path: Path, column: str):
        self.column = column
        super().__init__(f"{path}: missing column {column!r}")


@dataclass(frozen=True)
class Table:
    """One parsed CSV: header order plus raw string cells per column."""

    path: Path
    columns: tuple[str, ...]
    cells: dict[str, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.cells[self.columns[0]])

    def require(self, *names: str):
        for name in names:
            if name not in self.cells:
                raise MissingColumnError(self.path, name)

    def floats(self, name: str) -> np.ndarray:
        """Column as float64; empty cells become NaN."""
        self.require(name)
        return np.array(
            [float(cell) if cell else np.nan for cell in self.cells[name]],
            dtype=np.float64,
        )

    def strings(self, name: str) -> tuple[str, ...]:
        self.require(name)
        return self.cells[name]


def read_table(path: Path) -> Table:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTableError(f"{path}: empty CSV") from None
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyTableError(f"{path}: no data rows")
    if any(len(row) != len(header) for row in rows):
        raise TableError(f"{path}: ragged rows")
    cells = {
        name: tuple(row[i] for row in rows) for i, name in enumerate(header)
    }
    return Table(path=path, columns=tuple(header), cells=cells)


def read_manifest(path: Path) -> dict:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TableError(f"{path}: invalid JSON manifest: {exc}") from exc
    if not isinstance(payload, dict):
        raise TableError(f"{path}: manifest root must be an object")
    return payload
