"""Partial denoising of tube samples and Hausdorff distances.

The denoiser keeps the points whose distance to an estimated boundary of
the tube exceeds ``lambda * R``, then moves each of them along the line
through its boundary projection to distance ``R`` from that projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, NumericalError
from .geometry import as_cloud, as_points
from .noise import BB, RCONVEX, default_epsilon, default_rconvex_radius, estimate_R_bb, \
    estimate_R_rconvex
from .rconvex import empty_sphere_centers
from .samplers import CurveDescriptor, PolylineDistance, _directions

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class DenoiseConfig:
    lam: float = 0.5
    backend: str = BB
    epsilon: float | None = None
    r: float | None = None
    R: float | None = None

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ConfigError(f"lambda must be in (0, 1), got {self.lam}")
        if self.backend not in (BB, RCONVEX):
            raise ConfigError(f"backend must be 'bb' or 'rconvex', got {self.backend!r}")
        if self.R is not None and not self.R > 0:
            raise ConfigError(f"R must be positive, got {self.R}")


@dataclass(frozen=True)
class DenoiseResult:
    selected: np.ndarray
    projections: np.ndarray
    denoised: np.ndarray
    R_used: float
    n_dropped: int
    backend: str
    tuning: dict

    @property
    def m(self) -> int:
        return len(self.selected)

    def as_dict(self) -> dict:
        return {"m": self.m, "n_dropped": self.n_dropped, "R_used": self.R_used,
                "backend": self.backend, "tuning": self.tuning}


def _project_bb(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d, j = cKDTree(centers).query(points, k=1)
    return d, centers[j]


def _project_spheres(points: np.ndarray, spheres) -> tuple[np.ndarray, np.ndarray]:
    d, j = spheres.nearest(points)
    zc = spheres.centers[j]
    safe = np.where(d > 0, d, 1.0)
    proj = zc + spheres.r * (points - zc) / safe[:, None]
    return d - spheres.r, proj


def denoise(cloud, config: DenoiseConfig | None = None) -> DenoiseResult:
    cloud = as_cloud(cloud)
    config = config or DenoiseConfig()
    pts = cloud.points

    if config.backend == BB:
        eps = config.epsilon if config.epsilon is not None else default_epsilon(cloud)
        est = estimate_R_bb(cloud, eps)
        centers = pts[est.boundary]
        dist, proj = _project_bb(pts, centers)
        tuning = {"epsilon": float(eps)}
    else:
        r = config.r if config.r is not None else default_rconvex_radius(cloud, config.epsilon)
        spheres = empty_sphere_centers(cloud, r)
        est = estimate_R_rconvex(cloud, spheres=spheres)
        dist, proj = _project_spheres(pts, spheres)
        tuning = {"r": float(r)}

    R = float(config.R) if config.R is not None else est.value
    if not R > 0:
        raise NumericalError(f"R_used must be positive, got {R}")

    selected = np.flatnonzero(dist > config.lam * R)
    if len(selected) == 0:
        raise NumericalError("lambda too large or sample too small: no point selected")
    z, ok = project_translate(pts[selected], proj[selected], R)
    if not ok.any():
        raise NumericalError("lambda too large or sample too small: no point selected")
    return DenoiseResult(selected=selected[ok], projections=proj[selected][ok], denoised=z,
                         R_used=R, n_dropped=int((~ok).sum()), backend=config.backend,
                         tuning=tuning)


def project_translate(points: np.ndarray, projections: np.ndarray, R: float
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Move each point along the ray from its projection to distance R from it.

    Points closer than 1e-12 to their projection have no direction and are
    dropped; the boolean mask of kept rows is returned alongside.
    """
    offset = np.asarray(points, dtype=float) - projections
    norm = np.linalg.norm(offset, axis=1)
    ok = norm >= DEGENERATE_TOL
    z = projections[ok] + R * offset[ok] / norm[ok, None]
    return z, ok


@dataclass(frozen=True)
class Sphere:
    """Analytic sphere |x - center| = radius."""

    center: np.ndarray
    radius: float

    def distance(self, x: np.ndarray) -> np.ndarray:
        return np.abs(np.linalg.norm(x - np.asarray(self.center, dtype=float), axis=1) - self.radius)

    def dense_points(self, resolution: float) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        d = len(c)
        if d == 1:
            return np.array([[c[0] - self.radius], [c[0] + self.radius]])
        if d == 2:
            m = max(64, int(math.ceil(2 * math.pi * self.radius / resolution)))
            t = np.linspace(0, 2 * math.pi, m, endpoint=False)
            return c + self.radius * np.c_[np.cos(t), np.sin(t)]
        # spacing of m quasi-uniform points on the sphere scales like m^(-1/(d-1))
        area = 2 * math.pi ** (d / 2) / math.gamma(d / 2) * self.radius ** (d - 1)
        m = int(min(2e6, max(1000, 4 * area / resolution ** (d - 1))))
        u = _directions(np.random.default_rng(0), m, d)
        return c + self.radius * u


@dataclass(frozen=True)
class Polyline:
    curve: CurveDescriptor

    def distance(self, x: np.ndarray) -> np.ndarray:
        return PolylineDistance(self.curve)(x)

    def dense_points(self, resolution: float) -> np.ndarray:
        a, b = self.curve.segments()
        out = [a]
        length = np.linalg.norm(b - a, axis=1)
        steps = np.maximum(1, np.ceil(length / resolution).astype(int))
        for s in range(1, int(steps.max())):
            frac = np.minimum(s / steps, 1.0)[:, None]
            out.append(a + frac * (b - a))
        if not self.curve.closed:
            out.append(self.curve.vertices[-1:])
        return np.unique(np.concatenate(out), axis=0)


def hausdorff_distance(a, b, resolution: float = 1e-3) -> float:
    """Hausdorff distance between a cloud and a cloud, Sphere or Polyline.

    The analytic-to-cloud direction is a supremum over the analytic set and
    is evaluated on a dense sample of it with spacing ``resolution``.
    """
    pa = as_points(a)
    if pa.ndim != 2 or len(pa) == 0:
        raise ConfigError("hausdorff_distance needs nonempty inputs")
    if isinstance(b, (Sphere, Polyline)):
        forward = float(b.distance(pa).max())
        dense = b.dense_points(resolution)
        backward = float(cKDTree(pa).query(dense, k=1)[0].max())
        return max(forward, backward)
    pb = as_points(b)
    if pb.ndim != 2 or len(pb) == 0:
        raise ConfigError("hausdorff_distance needs nonempty inputs")
    forward = float(cKDTree(pb).query(pa, k=1)[0].max())
    backward = float(cKDTree(pa).query(pb, k=1)[0].max())
    return max(forward, backward)


def subsample(result: DenoiseResult, m: int, seed=0) -> np.ndarray:
    """m denoised points chosen uniformly without replacement (all if fewer)."""
    if result.m <= m:
        return result.denoised
    rng = np.random.default_rng(seed)
    return result.denoised[np.sort(rng.choice(result.m, size=m, replace=False))]

