"""Seeded generators for uniform and clustered unit vectors.

Every generator draws from ``numpy.random.Generator`` with the PCG64 bit
generator, so a given seed reproduces the same points on any machine.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import cap_angular_radius
from .balltree import angle_between
from .matrix import UnitPointSet

RNG_ALGORITHM = "PCG64"
MAGNITUDE_KINDS = ("unit", "uniform", "lognormal")


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def uniform_sphere_points(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian vector has probability zero; redraw to be safe
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def uniform_sphere(n: int, dim: int, seed) -> UnitPointSet:
    """``n`` points drawn uniformly from the unit sphere in R^dim."""
    if n < 1 or dim < 2:
        raise ValueError("need n >= 1 and dim >= 2")
    return UnitPointSet.from_points(uniform_sphere_points(n, dim, make_rng(seed)))


@dataclass(frozen=True)
class ClusterSpec:
    num_clusters: int
    points_per_cluster: int
    angular_radius: float
    dim: int
    seed: int

    def __post_init__(self):
        if self.num_clusters < 1 or self.points_per_cluster < 1 or self.dim < 2:
            raise ValueError("cluster counts must be positive and dim >= 2")
        if not 0.0 < self.angular_radius < math.pi / 2:
            raise ValueError("angular_radius must lie in (0, pi/2)")

    @classmethod
    def for_regime(cls, n_points: int, dim: int, tau: float, epsilon: float,
                   radius_fraction: float, seed: int) -> "ClusterSpec":
        """Clusters of ``ceil(dim ** tau)`` points with radius a fraction of asin(eps/sqrt2).

        Enough clusters are drawn to cover ``n_points``; the last one is not
        truncated, so the set may hold slightly more than ``n_points`` points.
        """
        per = math.ceil(dim ** tau)
        return cls(
            num_clusters=math.ceil(n_points / per),
            points_per_cluster=per,
            angular_radius=radius_fraction * cap_angular_radius(epsilon),
            dim=dim,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ClusteredSample:
    point_set: UnitPointSet
    labels: np.ndarray
    centers: np.ndarray


def _cap_points(center: np.ndarray, count: int, radius: float,
                rng: np.random.Generator) -> np.ndarray:
    dim = center.size
    sigma = 0.5 * radius / math.sqrt(max(dim - 1, 1))
    out = np.empty((count, dim))
    filled = 0
    while filled < count:
        k = count - filled
        t = sigma * rng.standard_normal((k, dim))
        t -= np.outer(t @ center, center)
        p = center + t
        p /= np.linalg.norm(p, axis=1)[:, None]
        ok = p[angle_between(p, center) <= radius]
        out[filled:filled + len(ok)] = ok
        filled += len(ok)
    return out


def clustered_sphere(spec: ClusterSpec) -> ClusteredSample:
    """Points in spherical caps of angular radius ``spec.angular_radius``.

    Centers are uniform on the sphere. Members are Gaussian perturbations in
    the tangent space of their center, renormalized, with any draw landing
    outside the cap rejected and redrawn. Points are ordered by cluster.
    """
    rng = make_rng(spec.seed)
    centers = uniform_sphere_points(spec.num_clusters, spec.dim, rng)
    blocks = [_cap_points(c, spec.points_per_cluster, spec.angular_radius, rng)
              for c in centers]
    labels = np.repeat(np.arange(spec.num_clusters), spec.points_per_cluster)
    return ClusteredSample(UnitPointSet.from_points(np.vstack(blocks)), labels, centers)


def sample_magnitudes(n: int, kind: str, rng: np.random.Generator) -> np.ndarray:
    if kind == "unit":
        return np.ones(n)
    if kind == "uniform":
        return rng.uniform(0.5, 2.0, size=n)
    if kind == "lognormal":
        return rng.lognormal(0.0, 1.0, size=n)
    raise ValueError(f"unknown magnitude distribution {kind!r}; use one of {MAGNITUDE_KINDS}")


def matrix_from_unit_points(points, magnitudes, orientation: str = "rows") -> np.ndarray:
    """Scale unit vectors by ``magnitudes`` and lay them out as rows or columns."""
    pts = points.points if isinstance(points, UnitPointSet) else np.asarray(points, dtype=np.float64)
    mags = np.asarray(magnitudes, dtype=np.float64)
    if mags.shape != (pts.shape[0],):
        raise ValueError(f"need {pts.shape[0]} magnitudes, got {mags.shape}")
    if np.any(mags <= 0):
        raise ValueError("magnitudes must be positive")
    scaled = pts * mags[:, None]
    if orientation == "rows":
        return np.ascontiguousarray(scaled)
    if orientation == "cols":
        return np.ascontiguousarray(scaled.T)
    raise ValueError("orientation must be 'rows' or 'cols'")


def make_operands(regime: str, m: int, n: int, dim: int, seed: int, *,
                  tau: float = 0.5, epsilon: float = 0.2, radius_fraction: float = 0.25,
                  magnitudes: str = "unit"):
    """Build ``(A, B, metadata)`` for a uniform or clustered experiment.

    A and B draw from independent child streams of ``seed``. For the
    clustered regime ``m`` and ``n`` are rounded up to whole clusters.
    """
    seed_a, seed_b, seed_m = np.random.SeedSequence(seed).generate_state(3)
    meta = {"regime": regime, "seed": seed, "rng": RNG_ALGORITHM, "dim": dim,
            "magnitudes": magnitudes}
    if regime == "uniform":
        pa = uniform_sphere(m, dim, int(seed_a)).points
        pb = uniform_sphere(n, dim, int(seed_b)).points
    elif regime == "clustered":
        spec_a = ClusterSpec.for_regime(m, dim, tau, epsilon, radius_fraction, int(seed_a))
        spec_b = ClusterSpec.for_regime(n, dim, tau, epsilon, radius_fraction, int(seed_b))
        sa, sb = clustered_sphere(spec_a), clustered_sphere(spec_b)
        pa, pb = sa.point_set.points, sb.point_set.points
        meta.update(tau=tau, epsilon=epsilon, radius_fraction=radius_fraction,
                    spec_a=spec_a.to_dict(), spec_b=spec_b.to_dict(),
                    labels_a=sa.labels.tolist(), labels_b=sb.labels.tolist())
    else:
        raise ValueError("regime must be 'uniform' or 'clustered'")
    rng = make_rng(int(seed_m))
    mags_a = sample_magnitudes(len(pa), magnitudes, rng)
    mags_b = sample_magnitudes(len(pb), magnitudes, rng)
    a = matrix_from_unit_points(pa, mags_a, "rows")
    b = matrix_from_unit_points(pb, mags_b, "cols")
    meta.update(m=a.shape[0], n=b.shape[1])
    return a, b, meta
