"""Feature/label file formats.

CSV: one row per feature, one column per frame, plain comma-separated
floats, no header; labels are a companion CSV of N integers (one per
line or comma-separated).

Binary (little-endian): magic ``GCRL``, u32 version (currently 1),
u32 n, u32 N, then n*N f64 entries in column-major order, then a u32
label flag; if the flag is 1, N i32 labels follow.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import FeatureSequence, normalize

MAGIC = b"GCRL"
VERSION = 1


def read_csv_matrix(path: str | Path) -> np.ndarray:
    """Parse a CSV feature matrix, naming the offending position on error."""
    path = Path(path)
    rows: list[list[float]] = []
    with path.open() as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ValueError(f"{path}: malformed value in row {i}") from exc
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(
                    f"{path}: dimension mismatch at row {i}: "
                    f"{len(rows[-1])} columns, expected {len(rows[0])}"
                )
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    X = np.asarray(rows, dtype=np.float64)
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        i, j = bad[0]
        raise ValueError(f"{path}: non-finite entry at row {i}, column {j}")
    return X


def write_csv_matrix(path: str | Path, X: np.ndarray) -> None:
    X = np.asarray(X, dtype=np.float64)
    with Path(path).open("w") as fh:
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_labels_csv(path: str | Path) -> np.ndarray:
    path = Path(path)
    values: list[int] = []
    with path.open() as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            for cell in line.split(","):
                try:
                    values.append(int(cell))
                except ValueError as exc:
                    raise ValueError(f"{path}: malformed label in row {i}") from exc
    if not values:
        raise ValueError(f"{path}: empty label file")
    return np.asarray(values, dtype=np.int64)


def write_labels_csv(path: str | Path, labels: np.ndarray) -> None:
    with Path(path).open("w") as fh:
        for v in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(v)}\n")


def write_binary(path: str | Path, X: np.ndarray, labels: np.ndarray | None = None) -> None:
    """Write the binary container (see module docstring)."""
    X = np.asarray(X, dtype=np.float64)
    n, N = X.shape
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, n, N))
        fh.write(np.asfortranarray(X).tobytes(order="F"))
        if labels is None:
            fh.write(struct.pack("<I", 0))
        else:
            labels = np.asarray(labels, dtype=np.int32)
            if labels.shape != (N,):
                raise ValueError(f"label block length {labels.size} does not match N={N}")
            fh.write(struct.pack("<I", 1))
            fh.write(labels.astype("<i4").tobytes())


def read_binary(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read the binary container; returns (matrix, labels or None)."""
    path = Path(path)
    raw = path.read_bytes()
    header = struct.calcsize("<III")
    if len(raw) < 4 + header or raw[:4] != MAGIC:
        raise ValueError(f"{path}: malformed header (bad magic)")
    version, n, N = struct.unpack_from("<III", raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    offset = 4 + header
    need = n * N * 8
    if len(raw) < offset + need + 4:
        raise ValueError(f"{path}: dimension mismatch (truncated payload for {n}x{N})")
    X = np.frombuffer(raw, dtype="<f8", count=n * N, offset=offset).reshape((n, N), order="F")
    offset += need
    (flag,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    labels = None
    if flag == 1:
        if len(raw) < offset + 4 * N:
            raise ValueError(f"{path}: dimension mismatch (truncated label block)")
        labels = np.frombuffer(raw, dtype="<i4", count=N, offset=offset).astype(np.int64)
    elif flag != 0:
        raise ValueError(f"{path}: malformed header (bad label flag {flag})")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"{path}: non-finite entry at row {bad[0]}, column {bad[1]}")
    return X.copy(), labels


def ingest(path: str | Path, labels_path: str | Path | None = None) -> FeatureSequence:
    """Load a feature file (format sniffed by magic), min-max normalize it,
    and attach labels from the file or a companion CSV."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open("rb") as fh:
        is_binary = fh.read(4) == MAGIC
    if is_binary:
        X, labels = read_binary(path)
    else:
        X = read_csv_matrix(path)
        labels = None
    if labels_path is not None:
        labels = read_labels_csv(labels_path)
        if labels.size != X.shape[1]:
            raise ValueError(
                f"{labels_path}: dimension mismatch: {labels.size} labels for {X.shape[1]} frames"
            )
    return FeatureSequence(features=normalize(X), labels=labels, name=path.stem)
