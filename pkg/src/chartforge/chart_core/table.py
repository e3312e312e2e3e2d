"""Tabular input parsing and column-kind inference."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from ..errors import EmptyTable, MalformedInput, NoNumericColumn

KINDS = ("numeric", "categorical", "temporal")


@dataclass
class Column:
    name: str
    kind: str  # numeric | categorical | temporal

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedInput(f"unknown column kind {self.kind!r}")


@dataclass
class DataTable:
    """Parsed tabular data: columns with inferred kinds plus row tuples.

    Numeric cells are floats (None where the source cell was empty);
    categorical and temporal cells are strings. Temporal columns carry no
    date arithmetic; they are ordered categoricals.
    """

    columns: list[Column]
    rows: list[tuple]
    title: str | None = None

    def __post_init__(self):
        ncol = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != ncol:
                raise MalformedInput(f"row {i} has {len(row)} values, expected {ncol}")
        if not self.rows:
            raise EmptyTable("table has no data rows")
        if not any(c.kind == "numeric" for c in self.columns):
            raise NoNumericColumn("table needs at least one numeric column")

    def column_index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise KeyError(name)

    def column_values(self, name: str) -> list:
        i = self.column_index(name)
        return [row[i] for row in self.rows]

    def numeric_columns(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == "numeric"]

    def to_dict(self) -> dict:
        return {
            "columns": [{"name": c.name, "kind": c.kind} for c in self.columns],
            "rows": [list(r) for r in self.rows],
            "title": self.title,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataTable":
        return cls(
            columns=[Column(c["name"], c["kind"]) for c in d["columns"]],
            rows=[tuple(r) for r in d["rows"]],
            title=d.get("title"),
        )


def _parse_number(text: str) -> float | None:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def _infer_and_convert(names: list[str], raw_rows: list[list]) -> DataTable:
    ncol = len(names)
    for i, row in enumerate(raw_rows):
        if len(row) != ncol:
            raise MalformedInput(f"row {i} has {len(row)} cells, expected {ncol}")
    columns = []
    converted: list[list] = [list(r) for r in raw_rows]
    for j, name in enumerate(names):
        cells = [row[j] for row in raw_rows]
        non_empty = [c for c in cells if c is not None and str(c).strip() != ""]
        numeric = bool(non_empty) and all(_parse_number(str(c)) is not None for c in non_empty)
        if numeric:
            columns.append(Column(name, "numeric"))
            for row in converted:
                cell = row[j]
                row[j] = None if cell is None or str(cell).strip() == "" else float(cell)
        else:
            columns.append(Column(name, "categorical"))
            for row in converted:
                row[j] = "" if row[j] is None else str(row[j])
    return DataTable(columns=columns, rows=[tuple(r) for r in converted])


def parse_table(data: bytes | str, fmt: str, title: str | None = None) -> DataTable:
    """Parse CSV (header row required) or JSON (array of flat objects).

    Column kinds are inferred: numeric when every non-empty cell parses as a
    number, categorical otherwise. ``title`` is not part of either wire
    format and is attached verbatim when given.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"input is not UTF-8: {exc}") from exc
    else:
        text = data
    if not text.strip():
        raise MalformedInput("input is empty")

    if fmt == "csv":
        table = _parse_csv(text)
    elif fmt == "json":
        table = _parse_json(text)
    else:
        raise MalformedInput(f"unknown format {fmt!r}")
    table.title = title
    return table


def _parse_csv(text: str) -> DataTable:
    try:
        reader = csv.reader(io.StringIO(text))
        records = [row for row in reader if row]
    except csv.Error as exc:
        raise MalformedInput(f"CSV parse error: {exc}") from exc
    if not records:
        raise MalformedInput("CSV has no header row")
    header = [h.strip() for h in records[0]]
    if any(not h for h in header):
        raise MalformedInput("CSV header has empty column names")
    body = records[1:]
    if not body:
        raise EmptyTable("CSV has a header but no data rows")
    return _infer_and_convert(header, [[c.strip() for c in row] for row in body])


def _parse_json(text: str) -> DataTable:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"JSON parse error: {exc}") from exc
    if not isinstance(payload, list):
        raise MalformedInput("JSON input must be an array of objects")
    if not payload:
        raise EmptyTable("JSON array is empty")
    if not all(isinstance(item, dict) for item in payload):
        raise MalformedInput("JSON array items must be objects")
    names = list(payload[0].keys())
    rows = []
    for i, item in enumerate(payload):
        if set(item.keys()) != set(names):
            raise MalformedInput(f"object {i} keys differ from the first object")
        row = []
        for name in names:
            value = item[name]
            if isinstance(value, (dict, list)):
                raise MalformedInput(f"object {i} field {name!r} is not flat")
            row.append(value)
        rows.append(row)
    return _infer_and_convert(names, rows)
