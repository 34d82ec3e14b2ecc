"""Dense matrices, magnitudes and unit-vector normalization.

Matrices are plain 2-D ``float64`` numpy arrays in C (row-major) order.
Columns of the right-hand operand are gathered explicitly whenever they are
treated as points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


class MatrixFormatError(ValueError):
    """Raised for non-finite entries or malformed matrix data."""


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Validate ``data`` as a finite 2-D float64 matrix and return it row-major."""
    arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if arr.ndim != 2:
        raise MatrixFormatError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixFormatError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class UnitPointSet:
    """Unit vectors taken from the rows (or columns) of a matrix.

    ``points`` holds only the retained (nonzero) vectors, in original order;
    ``retained[k]`` is the original index of ``points[k]``. ``magnitudes`` is
    indexed by original index and is exactly 0 for dropped vectors.
    """

    points: np.ndarray
    magnitudes: np.ndarray
    dropped: np.ndarray
    retained: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        """Number of retained points."""
        return self.points.shape[0]

    @property
    def total(self) -> int:
        """Number of original vectors, dropped ones included."""
        return self.magnitudes.shape[0]

    @classmethod
    def from_points(cls, points) -> "UnitPointSet":
        """Wrap vectors that are already unit length (magnitudes all 1)."""
        pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        n = pts.shape[0]
        return cls(pts, np.ones(n), np.zeros(0, dtype=np.intp), np.arange(n))


def row_magnitudes(a) -> np.ndarray:
    a = as_matrix(a, "A")
    return np.sqrt(np.einsum("ij,ij->i", a, a))


def col_magnitudes(b) -> np.ndarray:
    b = as_matrix(b, "B")
    return np.sqrt(np.einsum("ij,ij->j", b, b))


def magnitude_outer_product(mags_a, mags_b) -> np.ndarray:
    """M x N matrix with entry (i, j) equal to ``mags_a[i] * mags_b[j]``."""
    mags_a = np.asarray(mags_a, dtype=np.float64)
    mags_b = np.asarray(mags_b, dtype=np.float64)
    if np.any(mags_a < 0) or np.any(mags_b < 0):
        raise ValueError("magnitudes must be nonnegative")
    return np.outer(mags_a, mags_b)


def _normalize(vectors: np.ndarray, mags: np.ndarray) -> UnitPointSet:
    keep = mags > 0
    retained = np.flatnonzero(keep)
    dropped = np.flatnonzero(~keep)
    points = np.ascontiguousarray(vectors[retained] / mags[retained, None])
    return UnitPointSet(points, mags, dropped, retained)


def normalize_rows(a) -> UnitPointSet:
    """Rows of ``a`` as unit vectors; zero rows are dropped, never divided."""
    a = as_matrix(a, "A")
    return _normalize(a, row_magnitudes(a))


def normalize_cols(b) -> UnitPointSet:
    """Columns of ``b`` as unit vectors; zero columns are dropped."""
    b = as_matrix(b, "B")
    return _normalize(np.ascontiguousarray(b.T), col_magnitudes(b))


def naive_multiply(a, b) -> np.ndarray:
    """Reference O(MDN) product, used as the ground-truth oracle."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return kernels.naive_multiply(a, b)
