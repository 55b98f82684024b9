"""Devroye-Wise offset estimator, boundary balls, peeling and the
empty-interior decision rule.

A ball B(X_i, r) is a boundary ball of the union of balls exactly when the
Voronoi cell of X_i reaches distance >= r from X_i, so every flag here is
read off the Voronoi deltas of the sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .delaunay import build_delaunay, voronoi_deltas
from .errors import ConfigError, DimensionMismatchError
from .geometry import PointCloud, as_cloud, maxmin_nn


def _check_radius(r: float) -> float:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise ConfigError(f"radius must be positive and finite, got {r}")
    return r


def cell_deltas(cloud) -> np.ndarray:
    """Voronoi delta of every sample point.

    With n <= d every cell is unbounded; this case (including n = 1) is
    answered directly instead of being sent to the triangulation.
    """
    cloud = as_cloud(cloud)
    if cloud.n <= cloud.dim:
        return np.full(cloud.n, np.inf)
    return voronoi_deltas(build_delaunay(cloud))


@dataclass(frozen=True)
class OffsetEstimator:
    """The union of closed balls B(X_i, r)."""

    cloud: PointCloud
    r: float

    def __post_init__(self):
        object.__setattr__(self, "cloud", as_cloud(self.cloud))
        object.__setattr__(self, "r", _check_radius(self.r))

    def contains(self, x) -> np.ndarray:
        q = np.atleast_2d(np.asarray(x, dtype=float))
        if q.shape[1] != self.cloud.dim:
            raise DimensionMismatchError(
                f"query dimension {q.shape[1]} != cloud dimension {self.cloud.dim}"
            )
        return self.cloud.index.count_within(q, self.r)


def offset_membership(x, est: OffsetEstimator) -> bool:
    return bool(est.contains(np.asarray(x, dtype=float).reshape(1, -1))[0])


@dataclass(frozen=True)
class BoundaryBallReport:
    r: float
    delta: np.ndarray
    is_boundary: np.ndarray

    @property
    def peel_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    @property
    def boundary_ids(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary)

    @property
    def delta0(self) -> float:
        return float(self.delta.min())

    def at_radius(self, r: float) -> "BoundaryBallReport":
        """Same deltas, flags recomputed for another radius."""
        r = _check_radius(r)
        return BoundaryBallReport(r=r, delta=self.delta, is_boundary=self.delta >= r)


def boundary_balls(cloud, r: float, deltas: np.ndarray | None = None) -> BoundaryBallReport:
    r = _check_radius(r)
    delta = cell_deltas(cloud) if deltas is None else np.asarray(deltas, dtype=float)
    return BoundaryBallReport(r=r, delta=delta, is_boundary=delta >= r)


def peel(cloud, r: float) -> set[int]:
    """Ids of the centers of the non-boundary balls."""
    return {int(i) for i in boundary_balls(cloud, r).peel_ids}


def data_driven_radius(cloud, beta: float = 2.0) -> float:
    """beta times the connectivity statistic of the sample."""
    cloud = as_cloud(cloud)
    beta = float(beta)
    if not beta > 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    floor = 6.0 ** (1.0 / cloud.dim)
    if beta <= floor:
        warnings.warn(
            f"beta={beta} is not above 6**(1/d)={floor:.4f}; consistency is not guaranteed",
            stacklevel=2,
        )
    return beta * maxmin_nn(cloud)


def theoretical_radius(n: int, d: int, kappa: float) -> float:
    """(kappa log n / n)^(1/d), the radius sequence with a user-supplied kappa."""
    if n < 2 or d < 1 or not kappa > 0:
        raise ConfigError("need n >= 2, d >= 1 and kappa > 0")
    return (kappa * math.log(n) / n) ** (1.0 / d)


@dataclass(frozen=True)
class DimensionDecision:
    full_dimensional: bool
    delta0: float
    r_used: float
    n_boundary: int
    n_peel: int

    def as_dict(self) -> dict:
        return {
            "r_used": self.r_used,
            "delta0": None if math.isinf(self.delta0) else self.delta0,
            "full_dimensional": self.full_dimensional,
            "n_boundary": self.n_boundary,
            "n_peel": self.n_peel,
        }


def detect_full_dimension(cloud, r: float, deltas: np.ndarray | None = None) -> DimensionDecision:
    """Full-dimensional iff the peel is nonempty, i.e. iff min_i delta_i < r."""
    report = boundary_balls(cloud, r, deltas=deltas)
    n_peel = len(report.peel_ids)
    return DimensionDecision(
        full_dimensional=report.delta0 < report.r,
        delta0=report.delta0,
        r_used=report.r,
        n_boundary=len(report.delta) - n_peel,
        n_peel=n_peel,
    )
