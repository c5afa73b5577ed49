"""CSV-backed table model shared by store exports and the anonymizer.

Cells are opaque strings; numeric operations parse on demand. Loading honors
RFC-4180 quoting with either ``,`` or ``;`` as delimiter.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyFile, RaggedRow


@dataclass
class Table:
    header: list[str]
    rows: list[list[str]]
    delimiter: str = ","

    def column_index(self, name: str) -> int:
        return self.header.index(name)

    def column(self, name: str) -> list[str]:
        i = self.column_index(name)
        return [row[i] for row in self.rows]

    def copy(self) -> "Table":
        return Table(list(self.header), [list(r) for r in self.rows], self.delimiter)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=self.delimiter, lineterminator="\r\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="")


def parse_csv(text: str, delimiter: str = ",") -> Table:
    if not text.strip():
        raise EmptyFile("input has no header line")
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    records = [row for row in reader if row]
    header = records[0]
    rows = []
    for line_no, row in enumerate(records[1:], start=2):
        if len(row) != len(header):
            raise RaggedRow(line_no, len(header), len(row))
        rows.append(row)
    return Table(header, rows, delimiter)


def load_table(path: str | Path, delimiter: str = ",") -> Table:
    """Load a delimited file; the first line is the header."""
    if delimiter not in (",", ";"):
        raise ValueError(f"unsupported delimiter: {delimiter!r}")
    return parse_csv(Path(path).read_text(encoding="utf-8"), delimiter)
