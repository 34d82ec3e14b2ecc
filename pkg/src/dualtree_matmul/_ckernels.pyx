# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled traversal and naive-multiply kernels.

Mirrors ``_kernels_py``. The recursion runs without the GIL so independent
node pairs can be traversed from worker threads.
"""

from libc.math cimport sqrt, fabs
from libc.stdint cimport int64_t

import numpy as np

cdef double SQRT2 = sqrt(2.0)

cdef enum:
    PRUNES = 0
    LEAF_PAIRS = 1
    DOTS = 2
    VISITS = 3
    PRUNED_ENTRIES = 4

SPLIT = 1
DONE = 0


cdef struct Tree:
    const double *pts
    const int64_t *perm
    const int64_t *start
    const int64_t *end
    const int64_t *left
    const int64_t *right
    const double *cen
    const double *half


cdef inline double _dot(const double *x, const double *y, Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    for k in range(d):
        acc += x[k] * y[k]
    return acc


cdef double _threshold(double d, double epsilon, bint conservative) noexcept nogil:
    cdef double cons = epsilon / SQRT2
    cdef double s, t
    if conservative:
        return cons
    s = 1.0 - d * d
    s = sqrt(s) if s > 0.0 else 0.0
    t = epsilon / (s + fabs(d))
    return t if t > cons else cons


cdef int _visit(Tree *tu, Tree *tv, Py_ssize_t dim, Py_ssize_t r, Py_ssize_t q,
                double epsilon, bint conservative, double *out, Py_ssize_t ncols,
                int64_t *stats) noexcept nogil:
    cdef Py_ssize_t a, b, i, j
    cdef Py_ssize_t r0 = tu.start[r], r1 = tu.end[r]
    cdef Py_ssize_t q0 = tv.start[q], q1 = tv.end[q]
    cdef double d
    stats[VISITS] += 1
    if tu.left[r] < 0 and tv.left[q] < 0:
        for a in range(r0, r1):
            i = tu.perm[a]
            for b in range(q0, q1):
                j = tv.perm[b]
                out[i * ncols + j] = _dot(tu.pts + i * dim, tv.pts + j * dim, dim)
        stats[LEAF_PAIRS] += 1
        stats[DOTS] += (r1 - r0) * (q1 - q0)
        return 0
    d = _dot(tu.cen + r * dim, tv.cen + q * dim, dim)
    if d > 1.0:
        d = 1.0
    elif d < -1.0:
        d = -1.0
    stats[DOTS] += 1
    if tu.half[r] + tv.half[q] <= _threshold(d, epsilon, conservative):
        for a in range(r0, r1):
            i = tu.perm[a]
            for b in range(q0, q1):
                out[i * ncols + tv.perm[b]] = d
        stats[PRUNES] += 1
        stats[PRUNED_ENTRIES] += (r1 - r0) * (q1 - q0)
        return 0
    return 1


cdef void _traverse(Tree *tu, Tree *tv, Py_ssize_t dim, Py_ssize_t r, Py_ssize_t q,
                    double epsilon, bint conservative, double *out, Py_ssize_t ncols,
                    int64_t *stats) noexcept nogil:
    if _visit(tu, tv, dim, r, q, epsilon, conservative, out, ncols, stats) == 0:
        return
    if tu.left[r] < 0:
        _traverse(tu, tv, dim, r, tv.left[q], epsilon, conservative, out, ncols, stats)
        _traverse(tu, tv, dim, r, tv.right[q], epsilon, conservative, out, ncols, stats)
    elif tv.left[q] < 0:
        _traverse(tu, tv, dim, tu.left[r], q, epsilon, conservative, out, ncols, stats)
        _traverse(tu, tv, dim, tu.right[r], q, epsilon, conservative, out, ncols, stats)
    else:
        _traverse(tu, tv, dim, tu.left[r], tv.left[q], epsilon, conservative, out, ncols, stats)
        _traverse(tu, tv, dim, tu.left[r], tv.right[q], epsilon, conservative, out, ncols, stats)
        _traverse(tu, tv, dim, tu.right[r], tv.left[q], epsilon, conservative, out, ncols, stats)
        _traverse(tu, tv, dim, tu.right[r], tv.right[q], epsilon, conservative, out, ncols, stats)


cdef class _Bound:
    """Keeps the typed views alive while raw pointers into them are in use."""
    cdef const double[:, ::1] pts
    cdef const int64_t[::1] perm, start, end, left, right
    cdef const double[:, ::1] cen
    cdef const double[::1] half
    cdef Tree tree

    def __init__(self, pts, flat):
        self.pts = pts
        self.perm, self.start, self.end, self.left, self.right = flat[:5]
        self.cen = flat[5]
        self.half = flat[6]
        self.tree.pts = &self.pts[0, 0]
        self.tree.perm = &self.perm[0]
        self.tree.start = &self.start[0]
        self.tree.end = &self.end[0]
        self.tree.left = &self.left[0]
        self.tree.right = &self.right[0]
        self.tree.cen = &self.cen[0, 0]
        self.tree.half = &self.half[0]


def visit(u, tu, v, tv, Py_ssize_t r, Py_ssize_t q, double epsilon,
          bint conservative, double[:, ::1] cosines, int64_t[::1] stats):
    cdef _Bound bu = _Bound(u, tu)
    cdef _Bound bv = _Bound(v, tv)
    cdef int res
    with nogil:
        res = _visit(&bu.tree, &bv.tree, bu.pts.shape[1], r, q, epsilon,
                     conservative, &cosines[0, 0], cosines.shape[1], &stats[0])
    return res


def traverse(u, tu, v, tv, Py_ssize_t r, Py_ssize_t q, double epsilon,
             bint conservative, double[:, ::1] cosines, int64_t[::1] stats):
    cdef _Bound bu = _Bound(u, tu)
    cdef _Bound bv = _Bound(v, tv)
    with nogil:
        _traverse(&bu.tree, &bv.tree, bu.pts.shape[1], r, q, epsilon,
                  conservative, &cosines[0, 0], cosines.shape[1], &stats[0])


def naive_multiply(const double[:, ::1] a, const double[:, ::1] b):
    """Plain i-j-k triple loop."""
    cdef Py_ssize_t m = a.shape[0], d = a.shape[1], n = b.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for k in range(d):
                    acc = acc + a[i, k] * b[k, j]
                o[i, j] = acc
    return out
