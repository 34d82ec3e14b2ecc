"""End-to-end dual-tree approximate multiplication and its verification."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .balltree import build_tree
from .matrix import (
    DimensionError,
    as_matrix,
    magnitude_outer_product,
    normalize_cols,
    normalize_rows,
)
from .traversal import PruneRuleConfig, TraversalStats, traverse_trees

RULE_MODES = ("step9", "conservative")


@dataclass
class MultiplyResult:
    c_hat: np.ndarray
    stats: TraversalStats
    build_seconds: float = 0.0
    traversal_seconds: float = 0.0
    tree_nodes: tuple = field(default=(0, 0))


def dual_tree_matmul(
    a,
    b,
    epsilon: float,
    leaf_size: int = 1,
    rule_mode: str = "step9",
    *,
    split: str = "median",
    threads: int = 1,
    backend: Optional[str] = None,
) -> MultiplyResult:
    """Approximate ``a @ b`` with ``|c_ij - c_hat_ij| <= epsilon |a_i| |b_j|``.

    Rows of ``a`` and columns of ``b`` are normalized and organized into ball
    trees; a dual traversal estimates every cosine, and the estimates are
    scaled by the magnitude outer product. Zero rows and columns produce
    exact zeros.
    """
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    if rule_mode not in RULE_MODES:
        raise ValueError(f"rule_mode must be one of {RULE_MODES}, got {rule_mode!r}")
    cfg = PruneRuleConfig(epsilon, conservative=rule_mode == "conservative")

    us = normalize_rows(a)
    vs = normalize_cols(b)
    c_hat = magnitude_outer_product(us.magnitudes, vs.magnitudes)
    if us.size == 0 or vs.size == 0:
        return MultiplyResult(c_hat, TraversalStats())

    t0 = time.perf_counter()
    tree_u = build_tree(us, leaf_size, split)
    tree_v = build_tree(vs, leaf_size, split)
    t1 = time.perf_counter()
    cosines, stats = traverse_trees(tree_u, tree_v, cfg, threads=threads, backend=backend)
    t2 = time.perf_counter()

    full = np.zeros_like(c_hat)
    full[np.ix_(us.retained, vs.retained)] = cosines
    c_hat *= full
    return MultiplyResult(
        c_hat=c_hat,
        stats=stats,
        build_seconds=t1 - t0,
        traversal_seconds=t2 - t1,
        tree_nodes=(len(tree_u.start), len(tree_v.start)),
    )


@dataclass
class ErrorReport:
    max_abs_error_over_magnitude: float
    violations: int
    entries_checked: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "max_abs_error_over_magnitude": self.max_abs_error_over_magnitude,
            "violations": self.violations,
            "entries_checked": self.entries_checked,
        }


def verify_error_bound(c, c_hat, mags_a, mags_b, epsilon: float,
                       slack: float = 1e-9) -> ErrorReport:
    """Check ``|c_ij - c_hat_ij| <= epsilon |a_i| |b_j|`` entry by entry.

    An entry counts as a violation when its normalized error exceeds
    ``epsilon * (1 + slack)``. Entries with a zero magnitude product must
    match exactly and are excluded from the maximum.
    """
    c = np.asarray(c, dtype=np.float64)
    c_hat = np.asarray(c_hat, dtype=np.float64)
    if c.shape != c_hat.shape:
        raise DimensionError(f"shape mismatch {c.shape} vs {c_hat.shape}")
    scale = np.outer(mags_a, mags_b)
    err = np.abs(c - c_hat)
    nonzero = scale > 0
    rel = err[nonzero] / scale[nonzero]
    worst = float(rel.max()) if rel.size else 0.0
    violations = int(np.count_nonzero(rel > epsilon * (1.0 + slack)))
    violations += int(np.count_nonzero(err[~nonzero] != 0.0))
    return ErrorReport(worst, violations, int(c.size))


class ComplexityEstimate(NamedTuple):
    build_rows: float
    build_cols: float
    traversal: float
    total: float


def predicted_complexity(m: int, n: int, d: int, f_d: float) -> ComplexityEstimate:
    """Operation-count model ``MD log MD + ND log ND + MN (1 + D / f_d^2)``.

    ``f_d`` is the minimum number of points per prunable cluster. Logs are
    base 2 (tree depth).
    """
    if min(m, n, d) <= 0 or f_d <= 0:
        raise ValueError("all arguments must be positive")
    rows = m * d * math.log2(m * d) if m * d > 1 else 0.0
    cols = n * d * math.log2(n * d) if n * d > 1 else 0.0
    trav = m * n * (1.0 + d / (f_d * f_d))
    return ComplexityEstimate(rows, cols, trav, rows + cols + trav)
