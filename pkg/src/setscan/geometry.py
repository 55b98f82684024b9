"""Point clouds, exact nearest-neighbour queries and pairwise statistics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .errors import ConfigError, DimensionMismatchError, InsufficientPointsError


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An ordered, immutable set of ``n`` points in R^d.

    Duplicates are allowed here; modules that need distinct points check
    for themselves.
    """

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ConfigError(f"points must be a 2-d array, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise InsufficientPointsError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n}, dim={self.dim})"

    @cached_property
    def index(self) -> "SpatialIndex":
        return SpatialIndex(self)

    def transformed(self, rotation=None, shift=None, scale: float = 1.0) -> "PointCloud":
        """Return ``scale * points @ rotation.T + shift``."""
        pts = self.points
        if rotation is not None:
            pts = pts @ np.asarray(rotation, dtype=float).T
        pts = scale * pts
        if shift is not None:
            pts = pts + np.asarray(shift, dtype=float)
        return PointCloud(pts)

    def subset(self, ids: Iterable[int]) -> "PointCloud":
        return PointCloud(self.points[np.asarray(list(ids), dtype=int)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "PointCloud":
        return cls(read_csv(path))

    def to_csv(self, path: str | Path, header: Sequence[str] | None = None) -> None:
        write_csv(path, self.points, header=header)


def as_cloud(data) -> PointCloud:
    if isinstance(data, PointCloud):
        return data
    return PointCloud(data)


def as_points(data) -> np.ndarray:
    if isinstance(data, PointCloud):
        return data.points
    return np.asarray(data, dtype=float)


class SpatialIndex:
    """Exact nearest-neighbour index; ties go to the lowest point id."""

    def __init__(self, cloud: PointCloud | np.ndarray):
        self.cloud = as_cloud(cloud)
        self._tree = cKDTree(self.cloud.points)

    @property
    def tree(self) -> cKDTree:
        return self._tree

    def nearest(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Distances and ids of the nearest cloud point for each query row."""
        q = np.asarray(queries, dtype=float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        if q.shape[1] != self.cloud.dim:
            raise DimensionMismatchError(
                f"query dimension {q.shape[1]} != cloud dimension {self.cloud.dim}"
            )
        pts = self.cloud.points
        n = self.cloud.n
        k = min(n, 4)
        _, idx = self._tree.query(q, k=k)
        idx = np.asarray(idx).reshape(len(q), k)
        # recompute with one formula so exact ties compare equal
        dist = np.linalg.norm(pts[idx] - q[:, None, :], axis=2)
        order = np.lexsort((idx, dist), axis=1)
        best = np.take_along_axis(idx, order[:, :1], axis=1)[:, 0]
        best_d = np.take_along_axis(dist, order[:, :1], axis=1)[:, 0]
        if k < n:
            # all k candidates tied: the tie may extend beyond them
            crowded = np.nonzero(dist.max(axis=1) <= best_d)[0]
            for row in crowded:
                full = np.linalg.norm(pts - q[row], axis=1)
                j = int(np.argmin(full))
                best[row], best_d[row] = j, full[j]
        if single:
            return best_d[:1], best[:1]
        return best_d, best

    def distances(self, queries) -> np.ndarray:
        """Distance from each query row to the cloud (no tie-breaking needed)."""
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        if q.shape[1] != self.cloud.dim:
            raise DimensionMismatchError(
                f"query dimension {q.shape[1]} != cloud dimension {self.cloud.dim}"
            )
        d, _ = self._tree.query(q, k=1)
        return np.asarray(d, dtype=float)

    def count_within(self, queries, r: float) -> np.ndarray:
        """Boolean mask: query lies in some closed ball of radius ``r``."""
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        bound = np.nextafter(r, np.inf) * (1 + 1e-12)
        d, _ = self._tree.query(q, k=1, distance_upper_bound=bound)
        return d <= r


def dist_point_to_cloud(x, index: SpatialIndex) -> tuple[float, int]:
    d, i = index.nearest(np.asarray(x, dtype=float).reshape(-1))
    return float(d[0]), int(i[0])


def nn_distances(cloud) -> np.ndarray:
    """Distance from each point to its nearest *other* point."""
    cloud = as_cloud(cloud)
    if cloud.n < 2:
        raise InsufficientPointsError("insufficient points: need at least 2")
    d, _ = cloud.index.tree.query(cloud.points, k=2)
    return d[:, 1]


def maxmin_nn(cloud) -> float:
    """The connectivity statistic max_i min_{j != i} |X_j - X_i|."""
    return float(nn_distances(cloud).max())


def diameter(cloud) -> float:
    cloud = as_cloud(cloud)
    if cloud.n < 2:
        raise InsufficientPointsError("insufficient points: need at least 2")
    pts = cloud.points
    if cloud.n > 3000 and cloud.dim <= 4:
        # the farthest pair is always a pair of hull vertices
        from scipy.spatial import ConvexHull, QhullError

        try:
            pts = pts[ConvexHull(pts).vertices]
        except (QhullError, ValueError):
            pass
    if len(pts) > 20000:
        best = 0.0
        for start in range(0, len(pts), 2000):
            block = pts[start:start + 2000]
            best = max(best, float(np.max(np.linalg.norm(block[:, None] - pts[None], axis=2))))
        return best
    return float(pdist(pts).max())


def read_csv(path: str | Path) -> np.ndarray:
    """Read one point per row; a non-numeric first row is taken as a header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if lineno == 0 and not rows:
                    continue
                raise ConfigError(f"{path}: non-numeric value on line {lineno + 1}")
    if not rows:
        raise ConfigError(f"{path}: no points found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigError(f"{path}: rows have differing numbers of columns {sorted(widths)}")
    return np.array(rows, dtype=float)


def write_csv(path: str | Path, points, header: Sequence[str] | None = None) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in pts:
            w.writerow([repr(float(v)) for v in row])
