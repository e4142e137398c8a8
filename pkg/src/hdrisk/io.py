"""Dataset and matrix exchange formats for the CLI and service.

Datasets travel as CSV with the response in the first column, behind a
versioned comment line.  Covariance matrices are plain numeric CSV.
"""
from __future__ import annotations

import csv

import numpy as np

from .datagen import Dataset

DATASET_FORMAT_COMMENT = "# hdrisk dataset v1: y first column, then x1..xp"


def write_dataset_csv(data: Dataset, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(DATASET_FORMAT_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y"] + [f"x{j + 1}" for j in range(data.p)])
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i]))] + [repr(float(v)) for v in data.x[i]])


def read_dataset_csv(path: str) -> Dataset:
    """Parse a dataset CSV; leading '#' comment lines are skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ValueError(f"{path}: empty dataset file")
    header = rows[0]
    if not header or header[0].strip().lower() != "y":
        raise ValueError(f"{path}: first column must be the response 'y'")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray([[float(v) for v in r] for r in body])
    return Dataset(x=arr[:, 1:], y=arr[:, 0])


def read_matrix_csv(path: str) -> np.ndarray:
    """Plain numeric CSV (no header) into a 2-d array."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(ln for ln in fh if not ln.startswith("#")) if r]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    return np.asarray([[float(v) for v in r] for r in rows])
