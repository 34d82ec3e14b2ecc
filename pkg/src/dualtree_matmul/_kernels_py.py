"""Pure-Python traversal and naive-multiply kernels.

Same signatures and counter semantics as the compiled ``_ckernels`` module.
The Python versions additionally accept debug hooks (a write-count matrix
and a list collecting pruned node pairs) that the compiled path omits.
"""

import math

import numpy as np

SQRT2 = math.sqrt(2.0)

# indices into the int64 stats vector shared by both kernels
PRUNES, LEAF_PAIRS, DOTS, VISITS, PRUNED_ENTRIES = range(5)
NSTATS = 5

SPLIT, DONE = 1, 0


def prune_threshold(d, epsilon, conservative):
    """Largest admissible beta + gamma for centroid cosine ``d``."""
    cons = epsilon / SQRT2
    if conservative:
        return cons
    s = math.sqrt(max(0.0, 1.0 - d * d))
    return max(epsilon / (s + abs(d)), cons)


def visit(u, tu, v, tv, r, q, epsilon, conservative, cosines, stats,
          write_counts=None, pruned_pairs=None):
    """Handle one node pair; return SPLIT if its children still need visiting."""
    perm_u, start_u, end_u, left_u, _, cen_u, half_u = tu
    perm_v, start_v, end_v, left_v, _, cen_v, half_v = tv
    stats[VISITS] += 1
    rows = perm_u[start_u[r]:end_u[r]]
    cols = perm_v[start_v[q]:end_v[q]]
    if left_u[r] < 0 and left_v[q] < 0:
        block = u[rows] @ v[cols].T
        cosines[np.ix_(rows, cols)] = block
        stats[LEAF_PAIRS] += 1
        stats[DOTS] += rows.size * cols.size
        if write_counts is not None:
            write_counts[np.ix_(rows, cols)] += 1
        return DONE
    d = float(np.dot(cen_u[r], cen_v[q]))
    d = min(1.0, max(-1.0, d))
    stats[DOTS] += 1
    if half_u[r] + half_v[q] <= prune_threshold(d, epsilon, conservative):
        cosines[np.ix_(rows, cols)] = d
        stats[PRUNES] += 1
        stats[PRUNED_ENTRIES] += rows.size * cols.size
        if write_counts is not None:
            write_counts[np.ix_(rows, cols)] += 1
        if pruned_pairs is not None:
            pruned_pairs.append((r, q))
        return DONE
    return SPLIT


def children(tu, tv, r, q):
    """Child pairs of a split, in (L,L), (L,R), (R,L), (R,R) order."""
    left_u, right_u = tu[3], tu[4]
    left_v, right_v = tv[3], tv[4]
    if left_u[r] < 0:
        return [(r, left_v[q]), (r, right_v[q])]
    if left_v[q] < 0:
        return [(left_u[r], q), (right_u[r], q)]
    return [
        (left_u[r], left_v[q]),
        (left_u[r], right_v[q]),
        (right_u[r], left_v[q]),
        (right_u[r], right_v[q]),
    ]


def traverse(u, tu, v, tv, r, q, epsilon, conservative, cosines, stats,
             write_counts=None, pruned_pairs=None):
    if visit(u, tu, v, tv, r, q, epsilon, conservative, cosines, stats,
             write_counts, pruned_pairs) == DONE:
        return
    for cr, cq in children(tu, tv, r, q):
        traverse(u, tu, v, tv, int(cr), int(cq), epsilon, conservative,
                 cosines, stats, write_counts, pruned_pairs)


def naive_multiply(a, b):
    m, d = a.shape
    n = b.shape[1]
    bt = np.ascontiguousarray(b.T)
    out = np.empty((m, n))
    for i in range(m):
        row = a[i]
        for j in range(n):
            out[i, j] = np.dot(row, bt[j])
    return out
