"""File formats: CSV matrices, TSV pair lists, groups and labels files.

Floats are serialized with 17 significant digits so that re-reading a file
reproduces the exact double-precision values.
"""

import csv
import json
from typing import List, Optional, Tuple

import numpy as np

from .errors import ParseError

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    return FLOAT_FMT % x


def read_matrix_csv(path) -> np.ndarray:
    """Read a CSV matrix; an optional non-numeric first row is a header."""
    rows: List[List[float]] = []
    width = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            try:
                values = [float(v) for v in record]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ParseError(f"{path}:{lineno}: non-numeric row {record!r}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"{path}:{lineno}: expected {width} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_matrix_csv(path, M: np.ndarray, header: bool = True) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(",".join(f"c{k}" for k in range(M.shape[1])) + "\n")
        for row in M:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def read_pairs_tsv(path) -> List[Tuple[int, int, float]]:
    """Read 'i<TAB>j<TAB>value' triples (fair distances between pairs)."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 'i<TAB>j<TAB>value'")
            try:
                out.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: could not parse {line!r}")
    return out


def read_groups_csv(path):
    """Read 'row_index,group_id,is_original' rows; returns (group_of, is_original)."""
    entries = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if lineno == 1 and record[0].strip().lower() == "row_index":
                continue
            if len(record) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 columns")
            try:
                idx = int(record[0])
                flag = int(record[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: could not parse {record!r}")
            if flag not in (0, 1):
                raise ParseError(f"{path}:{lineno}: is_original must be 0 or 1")
            entries[idx] = (record[1].strip(), bool(flag))
    if not entries:
        raise ParseError(f"{path}: no data rows")
    n = max(entries) + 1
    if set(entries) != set(range(n)):
        raise ParseError(f"{path}: row indices must cover 0..{n - 1}")
    group_of = np.array([entries[i][0] for i in range(n)])
    is_original = np.array([entries[i][1] for i in range(n)], dtype=bool)
    return group_of, is_original


def read_labels_csv(path) -> np.ndarray:
    """Read 'row_index,label' rows into a dense label vector."""
    entries = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if lineno == 1 and record[0].strip().lower() == "row_index":
                continue
            if len(record) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 columns")
            try:
                entries[int(record[0])] = int(record[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: could not parse {record!r}")
    if not entries:
        raise ParseError(f"{path}: no data rows")
    n = max(entries) + 1
    if set(entries) != set(range(n)):
        raise ParseError(f"{path}: row indices must cover 0..{n - 1}")
    return np.array([entries[i] for i in range(n)], dtype=int)


def read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
