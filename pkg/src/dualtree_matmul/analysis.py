"""Closed-form occupancy analysis for uniformly distributed unit vectors.

All gamma-function ratios are evaluated through ``scipy.special.gammaln`` so
the formulas stay finite for dimensions in the millions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

SQRT2 = math.sqrt(2.0)
LOG_PI = math.log(math.pi)


def log_ball_volume(dim: int, r: float) -> float:
    if r == 0:
        return -math.inf
    return 0.5 * dim * LOG_PI + dim * math.log(r) - gammaln(0.5 * dim + 1.0)


def ball_volume(dim: int, r: float) -> float:
    """Volume of the ``dim``-ball of radius ``r``: pi^(D/2) r^D / Gamma(D/2 + 1)."""
    if dim < 1 or r < 0:
        raise ValueError("need dim >= 1 and r >= 0")
    return math.exp(log_ball_volume(dim, r))


def ball_surface_area(dim: int, r: float) -> float:
    """Surface area 2 pi^(D/2) r^(D-1) / Gamma(D/2), the r-derivative of the volume."""
    if dim < 1 or r <= 0:
        raise ValueError("need dim >= 1 and r > 0")
    return 2.0 * math.exp(0.5 * dim * LOG_PI + (dim - 1) * math.log(r) - gammaln(0.5 * dim))


def cap_angular_radius(epsilon: float) -> float:
    return math.asin(epsilon / SQRT2)


def gamma_ratio(dim: int) -> float:
    """Gamma((D+1)/2) / Gamma(D/2), which grows like sqrt(D/2)."""
    return math.exp(gammaln(0.5 * (dim + 1)) - gammaln(0.5 * dim))


@dataclass(frozen=True)
class OccupancyPrediction:
    m: int
    n: int
    dim: int
    epsilon: float
    cap_angular_radius: float
    expected_w: float
    log_expected_w: float

    def row(self) -> list:
        return [self.dim, self.m, self.n, self.epsilon, self.cap_angular_radius,
                self.expected_w, self.log_expected_w]


OCCUPANCY_COLUMNS = ["D", "M", "N", "epsilon", "cap_angular_radius",
                     "expected_w", "log_expected_w"]


def expected_occupancy(m: int, n: int, dim: int, epsilon: float) -> OccupancyPrediction:
    """Expected number of points per cap of angular radius asin(epsilon / sqrt 2).

    ``E[W] ~ M N Gamma(D/2) asin(eps/sqrt2)^(D-1) / (2 sqrt(pi) Gamma((D+1)/2))``,
    the flat (D-1)-ball of that radius divided by the area of the unit sphere.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if not 0.0 < epsilon < SQRT2:
        raise ValueError("epsilon must lie in (0, sqrt(2))")
    rho = cap_angular_radius(epsilon)
    log_w = (
        math.log(m) + math.log(n)
        + gammaln(0.5 * dim)
        + (dim - 1) * math.log(rho)
        - math.log(2.0) - 0.5 * LOG_PI
        - gammaln(0.5 * (dim + 1))
    )
    return OccupancyPrediction(m, n, dim, epsilon, rho, math.exp(log_w), log_w)


def occupancy_sweep(m: int, n: int, dims, epsilon: float) -> list[OccupancyPrediction]:
    return [expected_occupancy(m, n, int(d), epsilon) for d in dims]


def monte_carlo_cap_fraction(dim: int, epsilon: float, samples: int, seed: int,
                             centers: int = 1, chunk: int = 200_000) -> float:
    """Fraction of uniform unit vectors within asin(eps/sqrt2) of fixed centers.

    Each sample is tested against ``centers`` independent uniform centers;
    the returned value is hits / (samples * centers).
    """
    from .datagen import uniform_sphere_points

    rng = np.random.default_rng(seed)
    cos_rho = math.cos(cap_angular_radius(epsilon))
    c = uniform_sphere_points(centers, dim, rng)
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        pts = uniform_sphere_points(k, dim, rng)
        hits += int(np.count_nonzero(pts @ c.T >= cos_rho))
        done += k
    return hits / (samples * centers)


class RuntimeExponents(NamedTuple):
    """Exponents of D in the clustered square-case runtime.

    ``tree_exponent`` carries an extra log D factor (tree construction); the
    traversal term is ``D ** traversal_exponent``.
    """

    tree_exponent: float
    tree_has_log: bool
    traversal_exponent: float


def clustered_regime_runtime_exponent(tau: float) -> RuntimeExponents:
    """Runtime ``O(D^2 log D + D^(3 - 2 tau))`` for M = N = D and clusters of size D^tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return RuntimeExponents(2.0, True, 3.0 - 2.0 * tau)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)
