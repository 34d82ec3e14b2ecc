"""Ball trees over unit vectors.

Nodes are stored in flat arrays (preorder numbering, root = 0) so the
compiled traversal kernel can walk them without touching Python objects.
Each node owns the contiguous slice ``perm[start:end]`` of point indices,
a unit centroid and the largest angle between the centroid and any member.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .matrix import UnitPointSet

DEGENERATE_NORM = 1e-12


class EmptyInputError(ValueError):
    """Raised when a tree is requested over zero points."""


def angle_between(u, v) -> np.ndarray:
    """Angle in [0, pi] between unit vectors (broadcasts over leading axes).

    Uses ``2 * atan2(|u - v|, |u + v|)``, which stays accurate for nearly
    parallel and nearly antipodal vectors where ``arccos(u . v)`` does not.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    diff = np.linalg.norm(u - v, axis=-1)
    summ = np.linalg.norm(u + v, axis=-1)
    return 2.0 * np.arctan2(diff, summ)


SPLIT_RULES = ("median", "mean")


def partition(indices, points: np.ndarray, m: int, split: str = "median"):
    """Split ``indices`` on the coordinate with the widest range.

    Returns ``(None, None)`` when there are at most ``m`` indices. Otherwise
    the coordinate with the largest range is chosen (lowest dimension wins a
    tie) and the indices are stably sorted on it. The median rule sends the
    first ``ceil(n / 2)`` left, so points equal to the median fill the left
    side first. The mean rule sends points with coordinate <= the mean left,
    falling back to the median rule if that leaves a side empty.
    """
    indices = np.asarray(indices, dtype=np.intp)
    if indices.size == 0:
        raise EmptyInputError("cannot partition an empty index list")
    if indices.size <= m:
        return None, None
    sub = points[indices]
    spread = sub.max(axis=0) - sub.min(axis=0)
    k = int(np.argmax(spread))
    order = np.argsort(sub[:, k], kind="stable")
    ordered = indices[order]
    half = (indices.size + 1) // 2
    if split == "mean":
        vals = sub[order, k]
        cut = int(np.searchsorted(vals, vals.mean(), side="right"))
        if 0 < cut < indices.size:
            half = cut
    elif split != "median":
        raise ValueError(f"split must be one of {SPLIT_RULES}, got {split!r}")
    return ordered[:half], ordered[half:]


def _centroid_and_half_angle(pts: np.ndarray) -> tuple[np.ndarray, float]:
    mean = pts.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < DEGENERATE_NORM:
        centroid = pts[0].copy()
    else:
        centroid = mean / norm
    half = float(angle_between(pts, centroid).max())
    return centroid, half


@dataclass(frozen=True)
class BallNode:
    """Read-only view of one node of a :class:`BallTree`."""

    tree: "BallTree" = field(repr=False)
    index: int

    @property
    def point_indices(self) -> np.ndarray:
        t = self.tree
        return t.perm[t.start[self.index]:t.end[self.index]]

    @property
    def centroid(self) -> np.ndarray:
        return self.tree.centroid[self.index]

    @property
    def half_angle(self) -> float:
        return float(self.tree.half_angle[self.index])

    @property
    def is_leaf(self) -> bool:
        return self.tree.left[self.index] < 0

    @property
    def left(self) -> Optional["BallNode"]:
        c = self.tree.left[self.index]
        return None if c < 0 else BallNode(self.tree, int(c))

    @property
    def right(self) -> Optional["BallNode"]:
        c = self.tree.right[self.index]
        return None if c < 0 else BallNode(self.tree, int(c))

    @property
    def depth(self) -> int:
        return int(self.tree.depth[self.index])

    @property
    def size(self) -> int:
        return int(self.tree.end[self.index] - self.tree.start[self.index])


@dataclass(frozen=True, eq=False)
class BallTree:
    point_set: UnitPointSet
    leaf_size: int
    split: str
    perm: np.ndarray
    start: np.ndarray
    end: np.ndarray
    left: np.ndarray
    right: np.ndarray
    depth: np.ndarray
    centroid: np.ndarray
    half_angle: np.ndarray

    @property
    def root(self) -> BallNode:
        return BallNode(self, 0)

    @property
    def points(self) -> np.ndarray:
        return self.point_set.points

    def flat(self) -> tuple:
        """Arrays consumed by the traversal kernels."""
        i64 = np.int64
        return (
            self.perm.astype(i64, copy=False),
            self.start.astype(i64, copy=False),
            self.end.astype(i64, copy=False),
            self.left.astype(i64, copy=False),
            self.right.astype(i64, copy=False),
            self.centroid,
            self.half_angle,
        )

    def node(self, index: int) -> BallNode:
        return BallNode(self, index)

    def nodes(self) -> Iterator[BallNode]:
        for i in range(len(self.start)):
            yield BallNode(self, i)

    def leaves(self) -> Iterator[BallNode]:
        for i in np.flatnonzero(self.left < 0):
            yield BallNode(self, int(i))


def build_tree(point_set: UnitPointSet, leaf_size: int = 1, split: str = "median") -> BallTree:
    """Recursively partition ``point_set`` until nodes hold ``leaf_size`` points or fewer."""
    if leaf_size < 1:
        raise ValueError("leaf_size must be at least 1")
    points = point_set.points
    n = points.shape[0]
    if n == 0:
        raise EmptyInputError("cannot build a tree over an empty point set")

    perm = np.empty(n, dtype=np.intp)
    start, end, left, right, depth = [], [], [], [], []
    centroids, halves = [], []

    def grow(indices: np.ndarray, offset: int, level: int) -> int:
        node = len(start)
        perm[offset:offset + indices.size] = indices
        start.append(offset)
        end.append(offset + indices.size)
        depth.append(level)
        c, h = _centroid_and_half_angle(points[indices])
        centroids.append(c)
        halves.append(h)
        left.append(-1)
        right.append(-1)
        lo, hi = partition(indices, points, leaf_size, split)
        if lo is not None:
            left[node] = grow(lo, offset, level + 1)
            right[node] = grow(hi, offset + lo.size, level + 1)
        return node

    grow(np.arange(n, dtype=np.intp), 0, 0)
    return BallTree(
        point_set=point_set,
        leaf_size=leaf_size,
        split=split,
        perm=perm,
        start=np.asarray(start, dtype=np.intp),
        end=np.asarray(end, dtype=np.intp),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        depth=np.asarray(depth, dtype=np.intp),
        centroid=np.ascontiguousarray(np.vstack(centroids)),
        half_angle=np.asarray(halves, dtype=np.float64),
    )


class TreeShape(NamedTuple):
    nodes: int
    leaves: int
    min_leaf_depth: int
    max_leaf_depth: int


def node_count(tree: BallTree) -> int:
    return len(tree.start)


def leaf_depth_stats(tree: BallTree) -> TreeShape:
    leaf_depths = tree.depth[tree.left < 0]
    return TreeShape(
        nodes=node_count(tree),
        leaves=int(leaf_depths.size),
        min_leaf_depth=int(leaf_depths.min()),
        max_leaf_depth=int(leaf_depths.max()),
    )


def dump_tree(tree: BallTree) -> str:
    """One line per node in preorder: ``depth point_count half_angle``."""
    lines = [
        f"{d} {e - s} {float(h)!r}"
        for d, s, e, h in zip(tree.depth, tree.start, tree.end, tree.half_angle)
    ]
    return "\n".join(lines) + "\n"
