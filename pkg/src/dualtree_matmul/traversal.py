"""Dual-tree traversal with angular pruning.

A node pair (R, Q) is pruned when every cosine between their members is
guaranteed to lie within ``epsilon`` of the cosine between their centroids.
With alpha the centroid angle and beta, gamma the node half-angles, the
default rule prunes when

    beta + gamma <= epsilon / (|sin alpha| + |cos alpha|)

and the conservative rule when ``beta + gamma <= epsilon / sqrt(2)``, which
never prunes a pair the default rule would keep.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import kernels
from ._kernels_py import (
    DOTS,
    LEAF_PAIRS,
    NSTATS,
    PRUNED_ENTRIES,
    PRUNES,
    SPLIT,
    VISITS,
    children,
)
from .balltree import BallNode, BallTree

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PruneRuleConfig:
    epsilon: float
    conservative: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon < SQRT2:
            raise ValueError(f"epsilon must lie in (0, sqrt(2)), got {self.epsilon}")

    @property
    def mode(self) -> str:
        return "conservative" if self.conservative else "step9"


@dataclass
class TraversalStats:
    """Operation counts for one traversal.

    ``scalar_dot_products`` counts D-length inner products: one per point
    pair at a leaf pair, plus one centroid product per rule evaluation.
    ``pruned_entries`` is the number of output entries filled by prunes.
    """

    prune_count: int = 0
    leaf_pair_count: int = 0
    scalar_dot_products: int = 0
    node_pairs_visited: int = 0
    pruned_entries: int = 0

    @classmethod
    def from_counters(cls, counters) -> "TraversalStats":
        c = [int(x) for x in counters]
        return cls(
            prune_count=c[PRUNES],
            leaf_pair_count=c[LEAF_PAIRS],
            scalar_dot_products=c[DOTS],
            node_pairs_visited=c[VISITS],
            pruned_entries=c[PRUNED_ENTRIES],
        )

    def counters(self) -> np.ndarray:
        out = np.zeros(NSTATS, dtype=np.int64)
        out[PRUNES] = self.prune_count
        out[LEAF_PAIRS] = self.leaf_pair_count
        out[DOTS] = self.scalar_dot_products
        out[VISITS] = self.node_pairs_visited
        out[PRUNED_ENTRIES] = self.pruned_entries
        return out

    def __add__(self, other: "TraversalStats") -> "TraversalStats":
        return TraversalStats.from_counters(self.counters() + other.counters())

    def to_dict(self) -> dict:
        return asdict(self)


def center_angle(r: BallNode, q: BallNode) -> float:
    d = float(np.dot(r.centroid, q.centroid))
    return math.acos(min(1.0, max(-1.0, d)))


def should_prune(r: BallNode, q: BallNode, cfg: PruneRuleConfig) -> bool:
    return prune_rule(center_angle(r, q), r.half_angle, q.half_angle, cfg)


def prune_rule(alpha: float, beta: float, gamma: float, cfg: PruneRuleConfig) -> bool:
    """The pruning predicate on raw angles."""
    conservative = cfg.epsilon / SQRT2
    if cfg.conservative:
        threshold = conservative
    else:
        # max() pins the ordering against rounding; mathematically a no-op
        threshold = max(cfg.epsilon / (abs(math.sin(alpha)) + abs(math.cos(alpha))),
                        conservative)
    return beta + gamma <= threshold


def prune_error_bound(alpha: float, beta: float, gamma: float) -> float:
    """Worst-case ``|r . q - cos(alpha)|`` over members of two caps.

    Maximum of ``|cos(alpha +/- beta +/- gamma) - cos(alpha)|`` over the four
    sign choices; the extremes are attained with both points on the cap
    boundaries in the plane spanned by the two centers.
    """
    base = math.cos(alpha)
    return max(
        abs(math.cos(alpha + sb * beta + sg * gamma) - base)
        for sb in (1.0, -1.0)
        for sg in (1.0, -1.0)
    )


def dual_tree_compare_nodes(
    r: BallNode,
    q: BallNode,
    cfg: PruneRuleConfig,
    cosines: np.ndarray,
    stats: TraversalStats,
    *,
    backend: Optional[str] = None,
    write_counts: Optional[np.ndarray] = None,
    pruned_pairs: Optional[list] = None,
) -> TraversalStats:
    """Fill ``cosines`` for every point pair below ``(r, q)``.

    ``cosines`` is indexed by retained point position in each tree's point
    set. Returns the updated stats (``stats`` is also updated in place).
    The debug hooks force the Python backend.
    """
    tu, tv = r.tree, q.tree
    counters = stats.counters()
    if write_counts is not None or pruned_pairs is not None:
        kern = kernels.get("python")
        kern.traverse(tu.points, tu.flat(), tv.points, tv.flat(), r.index, q.index,
                      cfg.epsilon, cfg.conservative, cosines, counters,
                      write_counts, pruned_pairs)
    else:
        kern = kernels.get(backend)
        kern.traverse(tu.points, tu.flat(), tv.points, tv.flat(), r.index, q.index,
                      cfg.epsilon, cfg.conservative, cosines, counters)
    updated = TraversalStats.from_counters(counters)
    for name, value in updated.to_dict().items():
        setattr(stats, name, value)
    return stats


def traverse_trees(
    tree_u: BallTree,
    tree_v: BallTree,
    cfg: PruneRuleConfig,
    *,
    threads: int = 1,
    backend: Optional[str] = None,
) -> tuple[np.ndarray, TraversalStats]:
    """Cosine estimates for all retained pairs of two trees.

    With ``threads > 1`` the top of the traversal is expanded breadth-first
    until there are enough independent node pairs, which are then traversed
    on a thread pool. Each task owns a disjoint block of the output, so the
    cosines are bit-identical to a sequential run.
    """
    kern = kernels.get(backend)
    u, fu = tree_u.points, tree_u.flat()
    v, fv = tree_v.points, tree_v.flat()
    cosines = np.zeros((u.shape[0], v.shape[0]))
    counters = np.zeros(NSTATS, dtype=np.int64)
    eps, cons = cfg.epsilon, cfg.conservative

    if threads <= 1:
        kern.traverse(u, fu, v, fv, 0, 0, eps, cons, cosines, counters)
        return cosines, TraversalStats.from_counters(counters)

    tasks = [(0, 0)]
    while tasks and len(tasks) < 4 * threads:
        r, q = tasks.pop(0)
        if kern.visit(u, fu, v, fv, r, q, eps, cons, cosines, counters) == SPLIT:
            tasks.extend((int(a), int(b)) for a, b in children(fu, fv, r, q))

    def run(pair):
        local = np.zeros(NSTATS, dtype=np.int64)
        kern.traverse(u, fu, v, fv, pair[0], pair[1], eps, cons, cosines, local)
        return local

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for local in pool.map(run, tasks):
            counters += local
    return cosines, TraversalStats.from_counters(counters)
