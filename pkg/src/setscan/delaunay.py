"""Delaunay triangulation in dimensions 2-4 and the Voronoi quantities read off it.

The triangulation itself comes from Qhull (via :mod:`scipy.spatial`); this
module validates the input, computes circumspheres and exposes the dual
Voronoi information the estimators need.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import ConfigError, DegenerateInputError, DuplicatePointsError
from .geometry import PointCloud, as_cloud

MIN_DIM, MAX_DIM = 2, 4


def circumspheres(simplex_points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Circumcenters and circumradii of a stack of simplices.

    ``simplex_points`` has shape ``(m, k + 1, d)`` with ``k <= d``; for
    ``k < d`` the circumsphere is taken inside the affine hull of the
    simplex (the smallest sphere through its vertices).
    """
    p = np.asarray(simplex_points, dtype=float)
    base = p[:, 0, :]
    edges = p[:, 1:, :] - base[:, None, :]  # (m, k, d)
    rhs = 0.5 * np.einsum("mkd,mkd->mk", edges, edges)
    gram = np.einsum("mid,mjd->mij", edges, edges)  # (m, k, k)
    # center = base + edges^T @ lam with gram @ lam = rhs
    try:
        lam = np.linalg.solve(gram, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        lam = np.stack([np.linalg.lstsq(g, b, rcond=None)[0] for g, b in zip(gram, rhs)])
    offset = np.einsum("mk,mkd->md", lam, edges)
    centers = base + offset
    radii = np.linalg.norm(offset, axis=1)
    return centers, radii


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Delaunay simplices of a cloud with their circumspheres and adjacency.

    ``neighbors[s, k]`` is the simplex sharing the facet opposite local
    vertex ``k`` of simplex ``s``, or -1 when that facet is on the hull.
    """

    cloud: PointCloud
    simplices: np.ndarray
    neighbors: np.ndarray
    circumcenters: np.ndarray
    circumradii: np.ndarray

    @property
    def dim(self) -> int:
        return self.cloud.dim

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    @cached_property
    def hull_facets(self) -> np.ndarray:
        """Vertex ids of the (d-1)-faces lying on the convex hull."""
        s, k = np.nonzero(self.neighbors < 0)
        return self._facet_vertices(s, k)

    @cached_property
    def hull_vertices(self) -> np.ndarray:
        return np.unique(self.hull_facets)

    def _facet_vertices(self, s: np.ndarray, k: np.ndarray) -> np.ndarray:
        d1 = self.simplices.shape[1]
        keep = np.ones((len(s), d1), dtype=bool)
        keep[np.arange(len(s)), k] = False
        return self.simplices[s][keep].reshape(len(s), d1 - 1)

    def facets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Each (d-1)-face exactly once.

        Returns ``(vertices, simplex, opposite_local_index, neighbor)`` where
        ``neighbor`` is -1 for hull facets.
        """
        s, k = np.nonzero(np.ones_like(self.neighbors, dtype=bool))
        nb = self.neighbors[s, k]
        first = (nb < 0) | (s < nb)
        s, k, nb = s[first], k[first], nb[first]
        return self._facet_vertices(s, k), s, k, nb

    def facet_adjacency(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        verts, s, _, nb = self.facets()
        out = {}
        for v, a, b in zip(verts, s, nb):
            key = tuple(sorted(int(x) for x in v))
            out[key] = (int(a),) if b < 0 else (int(a), int(b))
        return out

    def simplex_volumes(self) -> np.ndarray:
        p = self.cloud.points[self.simplices]
        edges = p[:, 1:, :] - p[:, :1, :]
        fact = float(np.prod(np.arange(1, self.dim + 1)))
        return np.abs(np.linalg.det(edges)) / fact

    def to_json(self, path: str | Path | None = None) -> str:
        summaries = voronoi_summaries(self)
        payload = {
            "n": self.cloud.n,
            "d": self.dim,
            "simplices": [
                {
                    "vertices": [int(v) for v in verts],
                    "circumcenter": [float(c) for c in cc],
                    "circumradius": float(rr),
                }
                for verts, cc, rr in zip(self.simplices, self.circumcenters, self.circumradii)
            ],
            "cells": [
                {
                    "generator": s.generator,
                    "unbounded": s.unbounded,
                    "delta": None if np.isinf(s.delta) else s.delta,
                    "n_vertices": len(s.vertices),
                }
                for s in summaries
            ],
        }
        text = json.dumps(payload, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def _check_input(cloud: PointCloud) -> None:
    n, d = cloud.n, cloud.dim
    if not MIN_DIM <= d <= MAX_DIM:
        raise ConfigError(f"Delaunay triangulation supports 2 <= d <= 4, got d={d}")
    if n < d + 1:
        raise DegenerateInputError(f"degenerate input: need at least d+1={d + 1} points, got {n}")
    uniq = np.unique(cloud.points, axis=0)
    if len(uniq) != n:
        raise DuplicatePointsError(f"duplicate points: {n - len(uniq)} repeated rows")
    centered = cloud.points - cloud.points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateInputError("degenerate input: points lie in a hyperplane")


def build_delaunay(cloud) -> Triangulation:
    """Delaunay triangulation of a cloud of distinct, full-dimensional points."""
    cloud = as_cloud(cloud)
    _check_input(cloud)
    try:
        # Qt: triangulated output, cospherical sets resolved deterministically
        tri = Delaunay(cloud.points, qhull_options="Qbb Qc Qz Q12 Qt")
    except QhullError as exc:
        raise DegenerateInputError(f"degenerate input: {exc}") from exc
    if len(tri.coplanar):
        raise DuplicatePointsError(
            f"duplicate points: {len(tri.coplanar)} points were dropped as near-duplicates"
        )
    simplices = np.ascontiguousarray(tri.simplices, dtype=np.intp)
    centers, radii = circumspheres(cloud.points[simplices])
    return Triangulation(
        cloud=cloud,
        simplices=simplices,
        neighbors=np.ascontiguousarray(tri.neighbors, dtype=np.intp),
        circumcenters=centers,
        circumradii=radii,
    )


@dataclass(frozen=True)
class VoronoiCellSummary:
    generator: int
    vertices: np.ndarray
    unbounded: bool
    delta: float


def voronoi_deltas(tri: Triangulation) -> np.ndarray:
    """delta_i = sup over Vor(X_i) of the distance to X_i (+inf if unbounded).

    Every Voronoi vertex of cell i is the circumcenter of a simplex incident
    to X_i, at distance equal to that simplex's circumradius.
    """
    n = tri.cloud.n
    delta = np.zeros(n)
    np.maximum.at(delta, tri.simplices.ravel(), np.repeat(tri.circumradii, tri.simplices.shape[1]))
    delta[tri.hull_vertices] = np.inf
    return delta


def voronoi_summaries(tri: Triangulation) -> list[VoronoiCellSummary]:
    delta = voronoi_deltas(tri)
    d1 = tri.simplices.shape[1]
    flat = tri.simplices.ravel()
    owner = np.repeat(np.arange(tri.n_simplices), d1)
    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(tri.cloud.n + 1))
    out = []
    for i in range(tri.cloud.n):
        incident = owner[order[bounds[i]:bounds[i + 1]]]
        out.append(
            VoronoiCellSummary(
                generator=i,
                vertices=tri.circumcenters[incident],
                unbounded=bool(np.isinf(delta[i])),
                delta=float(delta[i]),
            )
        )
    return out
