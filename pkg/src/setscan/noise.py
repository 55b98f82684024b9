"""Estimating the half-width R1 of a tube-shaped sample, and the closeness
index to lower dimensionality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, NumericalError
from .geometry import as_cloud, diameter, maxmin_nn
from .minkowski import mc_union_volume, unit_ball_volume
from .offset import boundary_balls
from .rconvex import EmptySphereSet, dist_to_rhull_boundary, empty_sphere_centers

BB = "bb"
RCONVEX = "rconvex"


@dataclass(frozen=True)
class NoiseEstimate:
    method: str
    value: float
    tuning: dict
    n: int
    d: int
    # boundary estimate behind the value, reused by the denoiser
    boundary: object = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        return {"method": self.method, "value": self.value, "tuning": self.tuning,
                "n": self.n, "d": self.d}


def epsilon_rule(n: int, d: int, c: float) -> float:
    """c * (log n / n)^(1/d)."""
    if n < 2 or d < 1 or not c > 0:
        raise ConfigError(f"need n >= 2, d >= 1, c > 0 (got n={n}, d={d}, c={c})")
    return c * (math.log(n) / n) ** (1.0 / d)


def pilot_density_floor(cloud, N: int = 20000, seed=0) -> float:
    """Estimate of the density (assumed uniform) as 1 / volume of the support.

    The support volume is the Monte Carlo volume of the union of balls at the
    connectivity radius, which errs on the large side.
    """
    cloud = as_cloud(cloud)
    vol, _ = mc_union_volume(cloud, maxmin_nn(cloud), None, N, seed)
    if not vol > 0:
        raise NumericalError("pilot volume estimate is zero")
    return 1.0 / vol


def default_c(cloud, factor: float = 1.5, seed=0) -> float:
    """factor * (6 / (f0 * omega_d))^(1/d) with a plug-in density floor f0."""
    cloud = as_cloud(cloud)
    d = cloud.dim
    f0 = pilot_density_floor(cloud, seed=seed)
    return factor * (6.0 / (f0 * unit_ball_volume(d))) ** (1.0 / d)


def default_epsilon(cloud, seed=0) -> float:
    cloud = as_cloud(cloud)
    return epsilon_rule(cloud.n, cloud.dim, default_c(cloud, seed=seed))


def estimate_R_bb(cloud, epsilon: float | None = None, deltas=None) -> NoiseEstimate:
    """max_i min_{j in I_bb} |Y_i - Y_j| with I_bb the boundary balls at radius epsilon.

    A boundary center is its own nearest boundary center, so it contributes 0.
    """
    cloud = as_cloud(cloud)
    if epsilon is None:
        epsilon = default_epsilon(cloud)
    report = boundary_balls(cloud, epsilon, deltas=deltas)
    ids = report.boundary_ids
    if len(ids) == 0:  # pragma: no cover - hull points are always boundary
        raise NumericalError("no boundary balls found")
    centers = cloud.points[ids]
    d, _ = cKDTree(centers).query(cloud.points, k=1)
    return NoiseEstimate(method=BB, value=float(d.max()), tuning={"epsilon": float(epsilon)},
                         n=cloud.n, d=cloud.dim, boundary=ids)


def default_rconvex_radius(cloud, epsilon: float | None = None) -> float:
    """Pilot radius 0.5 * R_bb (heuristic; the theory needs r <= min(R1, R0 - R1))."""
    value = estimate_R_bb(cloud, epsilon).value
    if not value > 0:
        raise NumericalError("pilot estimate of R1 is zero; supply r explicitly")
    return 0.5 * value


def estimate_R_rconvex(cloud, r: float | None = None, spheres: EmptySphereSet | None = None
                       ) -> NoiseEstimate:
    """max_i d(Y_i, boundary of the r-convex hull)."""
    cloud = as_cloud(cloud)
    if spheres is None:
        if r is None:
            r = default_rconvex_radius(cloud)
        spheres = empty_sphere_centers(cloud, r)
    if spheres.m == 0:
        raise NumericalError("no boundary spheres at this radius")
    dist = dist_to_rhull_boundary(cloud.points, spheres)
    value = max(0.0, float(np.max(dist)))
    return NoiseEstimate(method=RCONVEX, value=value, tuning={"r": float(spheres.r)},
                         n=cloud.n, d=cloud.dim, boundary=spheres)


def estimate_noise(cloud, method: str = BB, epsilon: float | None = None,
                   r: float | None = None) -> NoiseEstimate:
    if method == BB:
        return estimate_R_bb(cloud, epsilon)
    if method == RCONVEX:
        if r is None:
            r = default_rconvex_radius(cloud, epsilon)
        return estimate_R_rconvex(cloud, r)
    raise ConfigError(f"unknown method {method!r}; use 'bb' or 'rconvex'")


def closeness_index(cloud, epsilon: float | None = None) -> float:
    """2 R_bb / diameter: near 0 for empty interior, near 1 for a ball."""
    cloud = as_cloud(cloud)
    return 2.0 * estimate_R_bb(cloud, epsilon).value / diameter(cloud)


def decide_inner_empty(estimate: NoiseEstimate | float, R1_known: float, tol: float) -> bool:
    """True when the estimate is within tol of the known half-width."""
    if R1_known < 0 or not tol > 0:
        raise ConfigError("need R1_known >= 0 and tol > 0")
    value = estimate.value if isinstance(estimate, NoiseEstimate) else float(estimate)
    return abs(value - R1_known) <= tol

