"""Matrix files: CSV text and a headerless little-endian binary layout.

Binary layout: ``[u64 rows][u64 cols][f64 x rows*cols]``, row-major, all
little-endian. CSV: one matrix row per line, comma separated, written with
the shortest round-tripping decimal representation.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .matrix import MatrixFormatError, as_matrix

_HEADER = np.dtype("<u8")
_VALUES = np.dtype("<f8")


def read_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not f.strip() for f in record):
                continue
            try:
                rows.append([float(f) for f in record])
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise MatrixFormatError(f"{path}: no data")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MatrixFormatError(f"{path}: ragged rows")
    return as_matrix(rows, str(path))


def write_csv(path, matrix) -> None:
    m = as_matrix(matrix)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in m:
            writer.writerow([repr(float(x)) for x in row])


def read_binary(path) -> np.ndarray:
    raw = open(path, "rb").read()
    if len(raw) < 16:
        raise MatrixFormatError(f"{path}: truncated header")
    rows, cols = (int(x) for x in np.frombuffer(raw[:16], dtype=_HEADER))
    expected = 16 + 8 * rows * cols
    if len(raw) != expected:
        raise MatrixFormatError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(raw)}")
    values = np.frombuffer(raw[16:], dtype=_VALUES).astype(np.float64)
    return as_matrix(values.reshape(rows, cols), str(path))


def write_binary(path, matrix) -> None:
    m = as_matrix(matrix)
    with open(path, "wb") as fh:
        fh.write(np.array(m.shape, dtype=_HEADER).tobytes())
        fh.write(m.astype(_VALUES).tobytes())


def _is_binary(path, fmt) -> bool:
    if fmt in ("csv", "bin"):
        return fmt == "bin"
    return os.path.splitext(str(path))[1].lower() in (".bin", ".dat")


def read_matrix(path, fmt: str = "auto") -> np.ndarray:
    """Read by explicit format, else by extension (``.bin``/``.dat`` are binary)."""
    return read_binary(path) if _is_binary(path, fmt) else read_csv(path)


def write_matrix(path, matrix, fmt: str = "auto") -> None:
    if _is_binary(path, fmt):
        write_binary(path, matrix)
    else:
        write_csv(path, matrix)
