"""Ingestion and validation of the Stamey et al. prostate measurements.

The canonical distribution is delimiter-separated text with a header row,
97 observations, eight clinical predictors and the log-PSA response. An
optional leading row-index column and an optional trailing train/test flag
are recognized by their header names; the flag is kept as metadata and never
used to drop rows. A copy of the file ships with the package.
"""

from __future__ import annotations

import csv
import io
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import Dataset

FEATURES = ("lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45")
RESPONSE = "lpsa"
EXPECTED_ROWS = 97

_INDEX_HEADERS = {"", "rownames", "row", "id", "index", "obs"}
_TRAIN_TRUE = {"t", "true", "1"}
_TRAIN_FALSE = {"f", "false", "0"}


def packaged_data_path() -> Path:
    """Location of the copy of the dataset installed with the package."""
    return Path(resources.files("steinlasso").joinpath("data/prostate.csv"))


def _read_text(source) -> str:
    if source is None:
        return packaged_data_path().read_text(encoding="utf-8")
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise DataError(f"data file not found: {path}")
        return path.read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    return source.read()


def _sniff_delimiter(header_line: str) -> str:
    for delim in ("\t", ",", ";"):
        if delim in header_line:
            return delim
    return None  # single-column or whitespace-separated


def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"non-numeric value {text!r} in column {column!r} at data row {row}"
        ) from None


def load_prostate(source=None) -> Dataset:
    """Parse and validate the dataset; `source` is a path, file object, or bytes.

    Returns a Dataset with the predictors in canonical order and lpsa as the
    response. Raises DataError with row/column coordinates on any schema or
    range violation.
    """
    text = _read_text(source)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("the file is empty")
    delim = _sniff_delimiter(lines[0])
    if delim is None:
        rows = [ln.split() for ln in lines]
        header = rows[0]
        data = rows[1:]
        # R-style tables may leave the row-name column unnamed in the header
        if data and len(header) == len(data[0]) - 1:
            header = [""] + header
    else:
        parsed = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delim))
        header = [h.strip() for h in parsed[0]]
        data = parsed[1:]

    columns = [h.strip() for h in header]
    index_col = 0 if columns and columns[0].lower() in _INDEX_HEADERS else None
    named = {c.lower(): i for i, c in enumerate(columns) if i != index_col}

    missing = [c for c in FEATURES + (RESPONSE,) if c not in named]
    if missing:
        raise DataError(f"missing required columns: {', '.join(missing)}")
    known = set(FEATURES) | {RESPONSE, "train"}
    unknown = [c for c in named if c not in known]
    if unknown:
        raise DataError(f"unknown columns: {', '.join(sorted(unknown))}")

    if len(data) != EXPECTED_ROWS:
        raise DataError(f"expected {EXPECTED_ROWS} data rows, found {len(data)}")

    X = np.empty((len(data), len(FEATURES)))
    y = np.empty(len(data))
    train = np.empty(len(data), dtype=bool) if "train" in named else None
    labels = [] if index_col is not None else None
    for r, row in enumerate(data, start=1):
        if len(row) != len(columns):
            raise DataError(f"data row {r} has {len(row)} fields, expected {len(columns)}")
        if labels is not None:
            labels.append(row[index_col].strip())
        for j, feat in enumerate(FEATURES):
            X[r - 1, j] = _parse_cell(row[named[feat]], r, feat)
        y[r - 1] = _parse_cell(row[named[RESPONSE]], r, RESPONSE)
        if train is not None:
            token = row[named["train"]].strip().lower()
            if token in _TRAIN_TRUE:
                train[r - 1] = True
            elif token in _TRAIN_FALSE:
                train[r - 1] = False
            else:
                raise DataError(f"unrecognized train flag {token!r} at data row {r}")

    _validate_ranges(X)
    metadata = {} if train is None else {"train": train}
    return Dataset(
        y=y,
        X=X,
        feature_names=FEATURES,
        row_labels=tuple(labels) if labels else None,
        metadata=metadata,
    )


def _validate_ranges(X: np.ndarray) -> None:
    checks = {
        "svi": lambda v: v in (0.0, 1.0),
        "gleason": lambda v: v in (6.0, 7.0, 8.0, 9.0),
        "age": lambda v: 20.0 <= v <= 100.0,
    }
    for feat, ok in checks.items():
        j = FEATURES.index(feat)
        for i, v in enumerate(X[:, j], start=1):
            if not ok(v):
                raise DataError(f"out-of-range {feat} value {v!r} at data row {i}")


def export_prostate(d: Dataset, destination) -> None:
    """Write a Dataset back out in the normalized comma-separated form."""
    train = d.metadata.get("train")
    header = list(FEATURES) + [RESPONSE] + (["train"] if train is not None else [])
    lines = [",".join(header)]
    ints = {"age", "svi", "gleason", "pgg45"}
    for i in range(d.n):
        cells = []
        for j, feat in enumerate(FEATURES):
            v = d.X[i, j]
            cells.append(str(int(v)) if feat in ints and float(v).is_integer() else repr(float(v)))
        cells.append(repr(float(d.y[i])))
        if train is not None:
            cells.append("T" if train[i] else "F")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)
