"""Dual-tree approximate matrix multiplication.

Entries of ``A @ B`` are written ``|a_i| |b_j| cos(theta_ij)``; the cosines
between normalized rows of A and columns of B are estimated by a dual
traversal of two ball trees, pruning node pairs whose cosines provably lie
within ``epsilon`` of their centroid cosine.
"""

__version__ = "0.1.0"

from .analysis import (
    ball_surface_area,
    ball_volume,
    clustered_regime_runtime_exponent,
    expected_occupancy,
)
from .balltree import BallNode, BallTree, build_tree, partition
from .datagen import ClusterSpec, clustered_sphere, matrix_from_unit_points, uniform_sphere
from .kernels import BACKEND
from .matrix import (
    UnitPointSet,
    col_magnitudes,
    magnitude_outer_product,
    naive_multiply,
    normalize_cols,
    normalize_rows,
    row_magnitudes,
)
from .pipeline import dual_tree_matmul, predicted_complexity, verify_error_bound
from .traversal import (
    PruneRuleConfig,
    TraversalStats,
    center_angle,
    dual_tree_compare_nodes,
    prune_error_bound,
    should_prune,
)
