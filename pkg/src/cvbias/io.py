"""CSV/JSON input and output for the command-line surface."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .conjlm import Dataset
from .errors import SchemaMismatch, UnreadableInput


def _read_cells(path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise UnreadableInput(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise UnreadableInput(f"{path} is empty")
    return rows


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_matrix_csv(path):
    """Read a numeric CSV; returns (values, header-or-None)."""
    rows = _read_cells(path)
    header = None
    if not all(_is_float(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise UnreadableInput(f"{path} has a header but no data rows")
    try:
        values = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise UnreadableInput(f"{path}: non-numeric cell ({exc})") from exc
    return values, header


def read_loglik_csv(path) -> np.ndarray:
    """Log-likelihood matrix: rows are draws, columns observations."""
    values, _ = read_matrix_csv(path)
    return values


def read_pointwise_csv(path) -> np.ndarray:
    """Pointwise elpd vector: a single CSV column (header optional)."""
    values, _ = read_matrix_csv(path)
    if values.shape[1] != 1:
        raise SchemaMismatch(
            f"{path}: pointwise input must have exactly 1 column, got {values.shape[1]}"
        )
    return values[:, 0]


def read_dataset_csv(path, target: str) -> Dataset:
    """Dataset CSV with a header row; ``target`` names the response column."""
    values, header = read_matrix_csv(path)
    if header is None:
        raise SchemaMismatch(f"{path}: dataset CSV needs a header row")
    if target not in header:
        raise SchemaMismatch(
            f"{path}: target column {target!r} not found (columns: {', '.join(header)})"
        )
    ti = header.index(target)
    keep = [i for i in range(len(header)) if i != ti]
    return Dataset(
        values[:, keep],
        values[:, ti],
        intercept=True,
        columns=tuple(header[i] for i in keep),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    """Write dict rows as CSV with a fixed column order (byte-stable)."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def dump_json(obj) -> str:
    """Deterministic JSON text (sorted keys, stable float repr)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
