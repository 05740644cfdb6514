"""CSV tables and JSON sidecars.

Every CSV starts with the line ``#schema=dicke-qb/1`` followed by a header
row. Floats are written with ``repr`` (shortest round-trip form), so equal
results give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

SCHEMA = "dicke-qb/1"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return _fmt(value.item())
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"#schema={SCHEMA}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Return ``(header, rows)`` with cells as strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if first != f"#schema={SCHEMA}":
            raise ValueError(f"{path}: missing schema line, got {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def read_columns(path: str | Path) -> dict[str, list]:
    """Columns of a CSV, converted to float where possible."""
    header, rows = read_csv(path)
    cols: dict[str, list] = {h: [] for h in header}
    for row in rows:
        for h, cell in zip(header, row):
            try:
                cols[h].append(float(cell))
            except ValueError:
                cols[h].append(cell)
    return cols


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_sidecar(csv_path: str | Path, payload: dict) -> Path:
    """Write ``<name>.json`` next to ``<name>.csv``."""
    path = Path(csv_path).with_suffix(".json")
    body = {"schema": SCHEMA, "file": Path(csv_path).name}
    body.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(body), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
