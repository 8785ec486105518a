"""Dataset interchange: UTF-8 CSV with a plain-text schema sidecar.

Schema sidecar: one line per attribute, ``name,kind[,v1|v2|...],role``.
CSV: header row of attribute names; nominal values written as their labels,
numerics in shortest round-trip decimal form, missing values as ``?``.

Files written here are in canonical form: reading one back and writing it
again reproduces the bytes exactly (modulo line endings).
"""

from __future__ import annotations

import csv
import io as _io
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import (
    MISSING_TOKEN,
    NOMINAL,
    AttributeSchema,
    DataError,
    Dataset,
)


def format_number(x: float) -> str:
    """Shortest decimal text that parses back to exactly ``x``."""
    return repr(float(x))


def parse_schema_text(text: str) -> list[AttributeSchema]:
    attrs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) == 3:
            name, kind, role = parts
            values: tuple[str, ...] = ()
        elif len(parts) == 4:
            name, kind, value_field, role = parts
            values = tuple(value_field.split("|")) if value_field else ()
        else:
            raise DataError(f"schema line {lineno}: expected 3 or 4 comma-separated fields")
        try:
            attrs.append(AttributeSchema(name.strip(), kind.strip(), values, role.strip()))
        except DataError as exc:
            raise DataError(f"schema line {lineno}: {exc}") from None
    return attrs


def schema_to_text(schema: Sequence[AttributeSchema]) -> str:
    lines = []
    for a in schema:
        if a.kind == NOMINAL:
            lines.append(f"{a.name},{a.kind},{'|'.join(a.values)},{a.role}")
        else:
            lines.append(f"{a.name},{a.kind},{a.role}")
    return "\n".join(lines) + "\n"


def read_schema(path: str | Path) -> list[AttributeSchema]:
    return parse_schema_text(Path(path).read_text(encoding="utf-8"))


def write_schema(schema: Sequence[AttributeSchema], path: str | Path) -> None:
    atomic_write_text(path, schema_to_text(schema))


def read_dataset(csv_path: str | Path, schema_path: str | Path | None = None) -> Dataset:
    """Read a dataset from CSV plus its schema sidecar.

    When ``schema_path`` is omitted, ``<csv_path stem>.schema`` next to the
    CSV is used.
    """
    csv_path = Path(csv_path)
    if schema_path is None:
        schema_path = csv_path.with_suffix(".schema")
    schema = read_schema(schema_path)
    by_name = {a.name: a for a in schema}

    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{csv_path}: empty CSV (missing header)") from None
        if set(header) != set(by_name) or len(header) != len(schema):
            raise DataError(f"{csv_path}: header does not match schema attributes")
        ordered = [by_name[name] for name in header]
        rows = list(reader)
        for i, row in enumerate(rows):
            if len(row) != len(header):
                raise DataError(f"{csv_path}: row {i + 2} has {len(row)} cells, "
                                f"expected {len(header)}")

    n = len(rows)
    cols = []
    for j, attr in enumerate(ordered):
        if attr.kind == NOMINAL:
            lookup = {v: i for i, v in enumerate(attr.values)}
            col = np.full(n, -1, dtype=np.int32)
            for i, row in enumerate(rows):
                cell = row[j]
                if cell != MISSING_TOKEN:
                    if cell not in lookup:
                        raise DataError(f"{csv_path}: row {i + 2}: {cell!r} is not a "
                                        f"declared value of {attr.name!r}")
                    col[i] = lookup[cell]
        else:
            col = np.full(n, np.nan, dtype=np.float64)
            for i, row in enumerate(rows):
                cell = row[j]
                if cell != MISSING_TOKEN:
                    try:
                        col[i] = float(cell)
                    except ValueError:
                        raise DataError(f"{csv_path}: row {i + 2}: bad numeric value "
                                        f"{cell!r} for {attr.name!r}") from None
        cols.append(col)
    return Dataset(ordered, cols)


def dataset_to_csv_text(d: Dataset) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in d.schema])
    ncols = len(d.schema)
    raw = [d.column_at(j) for j in range(ncols)]
    for i in range(len(d)):
        row = []
        for j, attr in enumerate(d.schema):
            v = raw[j][i]
            if attr.kind == NOMINAL:
                row.append(MISSING_TOKEN if v < 0 else attr.values[v])
            else:
                row.append(MISSING_TOKEN if np.isnan(v) else format_number(v))
        writer.writerow(row)
    return buf.getvalue()


def write_dataset(d: Dataset, csv_path: str | Path, schema_path: str | Path | None = None) -> None:
    csv_path = Path(csv_path)
    if schema_path is None:
        schema_path = csv_path.with_suffix(".schema")
    atomic_write_text(csv_path, dataset_to_csv_text(d))
    write_schema(d.schema, schema_path)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file atomically (temporary file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
