"""Centers of the empty r-balls bounding the r-convex hull, and distances /
projections onto the union of their spheres.

Each center lies on a Voronoi edge, i.e. on the line through the
circumcenter of a Delaunay (d-1)-face orthogonal to that face. Along that
line the distance to the face's vertices is sqrt(rho^2 + t^2), so the
tangent positions are t = +-sqrt(r^2 - rho^2), kept when they fall inside
the Voronoi edge (a segment, or a half-line for hull faces).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .delaunay import Triangulation, build_delaunay, circumspheres
from .errors import ConfigError, NumericalError
from .geometry import as_cloud

EMPTY_TOL = 1e-9
MERGE_TOL = 1e-9


def _face_normals(face_pts: np.ndarray) -> np.ndarray:
    """Unit normals of a stack of (d-1)-faces, shape (m, d, d) -> (m, d)."""
    edges = face_pts[:, 1:, :] - face_pts[:, :1, :]
    # the right singular vector of the smallest singular value spans the normal
    _, _, vt = np.linalg.svd(edges, full_matrices=True)
    return vt[:, -1, :]


@dataclass(frozen=True)
class EmptySphereSet:
    r: float
    centers: np.ndarray

    def __post_init__(self):
        self.centers.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.centers)

    def __len__(self) -> int:
        return self.m

    @property
    def tree(self) -> cKDTree:
        tree = self.__dict__.get("_tree")
        if tree is None:
            tree = cKDTree(self.centers)
            object.__setattr__(self, "_tree", tree)
        return tree

    def nearest(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Distance to and index of the nearest center (lowest index on ties)."""
        if self.m == 0:
            raise NumericalError("no boundary spheres at this radius")
        q = np.atleast_2d(np.asarray(x, dtype=float))
        k = min(self.m, 4)
        _, idx = self.tree.query(q, k=k)
        idx = np.asarray(idx).reshape(len(q), k)
        dist = np.linalg.norm(self.centers[idx] - q[:, None, :], axis=2)
        order = np.lexsort((idx, dist), axis=1)[:, 0]
        rows = np.arange(len(q))
        return dist[rows, order], idx[rows, order]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"z{k}" for k in range(self.centers.shape[1])] if self.m else ["z0"])
            for row in self.centers:
                w.writerow([repr(float(v)) for v in row])


def empty_sphere_centers(cloud, r: float, tri: Triangulation | None = None) -> EmptySphereSet:
    cloud = as_cloud(cloud)
    r = float(r)
    if not r > 0:
        raise ConfigError(f"radius must be positive, got {r}")
    if tri is None:
        tri = build_delaunay(cloud)
    pts = cloud.points
    verts, s, k, nb = tri.facets()
    face_pts = pts[verts]
    fc, rho = circumspheres(face_pts)
    normal = _face_normals(face_pts)
    # orient each normal away from the vertex of s opposite the face
    opposite = pts[tri.simplices[s, k]]
    flip = np.einsum("md,md->m", opposite - fc, normal) > 0
    normal[flip] *= -1.0

    t_s = np.einsum("md,md->m", tri.circumcenters[s] - fc, normal)
    hull = nb < 0
    t_nb = np.full_like(t_s, np.inf)
    t_nb[~hull] = np.einsum("md,md->m", tri.circumcenters[nb[~hull]] - fc[~hull], normal[~hull])
    lo = np.minimum(t_s, t_nb)
    hi = np.maximum(t_s, t_nb)

    reach = r * r - rho * rho
    ok = reach >= 0
    h = np.sqrt(np.where(ok, reach, 0.0))
    cands = []
    for sign in (1.0, -1.0):
        t = sign * h
        inside = ok & (t >= lo) & (t <= hi)
        cands.append(fc[inside] + t[inside, None] * normal[inside])
    centers = np.concatenate(cands, axis=0) if cands else np.empty((0, cloud.dim))

    if len(centers):
        d, _ = cloud.index.tree.query(centers, k=1)
        centers = centers[d >= r - EMPTY_TOL * max(1.0, r)]
    centers = _dedupe(centers)
    return EmptySphereSet(r=r, centers=centers)


def _dedupe(centers: np.ndarray) -> np.ndarray:
    if len(centers) < 2:
        return centers
    # deterministic order first, then merge near-coincident centers
    centers = centers[np.lexsort(centers.T[::-1])]
    pairs = cKDTree(centers).query_pairs(MERGE_TOL, output_type="ndarray")
    if len(pairs) == 0:
        return centers
    drop = np.zeros(len(centers), dtype=bool)
    for a, b in sorted(map(tuple, pairs)):
        if not drop[a]:
            drop[b] = True
    return centers[~drop]


def dist_to_rhull_boundary(x, z: EmptySphereSet) -> np.ndarray | float:
    """min_i |x - z_i| - r; meaningful for points of the r-convex hull."""
    x = np.asarray(x, dtype=float)
    d, _ = z.nearest(x)
    out = d - z.r
    return float(out[0]) if x.ndim == 1 else out


def project_to_rhull_boundary(x, z: EmptySphereSet) -> np.ndarray:
    """Closest point on the sphere around the nearest center."""
    x = np.asarray(x, dtype=float)
    q = np.atleast_2d(x)
    d, idx = z.nearest(q)
    if np.any(d == 0):
        raise NumericalError("projection undefined: query coincides with a sphere center")
    zc = z.centers[idx]
    proj = zc + z.r * (q - zc) / d[:, None]
    return proj[0] if x.ndim == 1 else proj
