"""Seeded samplers for spheres, spherical shells and tubes around curves."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, NumericalError
from .geometry import PointCloud


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substream(master: int, *names) -> np.random.SeedSequence:
    """A seed sequence derived from a master seed and a path of names.

    Strings are hashed with CRC32 so the mapping is stable across runs and
    platforms.
    """
    key = []
    for name in names:
        if isinstance(name, str):
            key.append(zlib.crc32(name.encode()))
        elif isinstance(name, float):
            key.append(zlib.crc32(repr(name).encode()))
        else:
            key.append(int(name))
    return np.random.SeedSequence(entropy=int(master) & (2**64 - 1), spawn_key=tuple(key))


def _directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0):  # pragma: no cover - probability zero
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def sample_sphere(n: int, d: int, seed=None) -> PointCloud:
    """n iid uniform points on the unit sphere in R^d."""
    if n < 1 or d < 1:
        raise ConfigError("need n >= 1 and d >= 1")
    return PointCloud(_directions(rng_from(seed), n, d))


def shell_radius_cdf(rho, d: int, A: float) -> np.ndarray:
    """P(|Y| <= rho) for Y uniform on the shell 1-A <= |y| <= 1+A."""
    lo, hi = (1 - A) ** d, (1 + A) ** d
    rho = np.clip(np.asarray(rho, dtype=float), 1 - A, 1 + A)
    return (rho**d - lo) / (hi - lo)


def sample_shell(n: int, d: int, A: float, seed=None, inner: float | None = None,
                 outer: float | None = None) -> PointCloud:
    """n iid uniform points on B(0, 1+A) minus the open ball B(0, 1-A).

    ``inner``/``outer`` override the radii (used for Monte Carlo regions).
    """
    if inner is None and not 0 <= A < 1:
        raise ConfigError(f"shell half-width A must be in [0, 1), got {A}")
    if n < 1 or d < 1:
        raise ConfigError("need n >= 1 and d >= 1")
    rng = rng_from(seed)
    lo = 1 - A if inner is None else inner
    hi = 1 + A if outer is None else outer
    u = _directions(rng, n, d)
    if hi == lo:
        return PointCloud(lo * u)
    w = rng.random(n)
    radius = (w * (hi**d - lo**d) + lo**d) ** (1.0 / d)
    return PointCloud(radius[:, None] * u)


def superellipse(t: np.ndarray, p: float = 3.0) -> np.ndarray:
    e = 2.0 / p
    c, s = np.cos(t), np.sin(t)
    return np.c_[np.sign(c) * np.abs(c) ** e, np.sign(s) * np.abs(s) ** e]


def trefoil(t: np.ndarray) -> np.ndarray:
    return np.c_[np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)]


def circle(t: np.ndarray) -> np.ndarray:
    return np.c_[np.cos(t), np.sin(t)]


CURVES = {"circle": circle, "superellipse": superellipse, "trefoil": trefoil}


@dataclass(frozen=True)
class CurveDescriptor:
    """A closed curve and its polyline approximation.

    ``vertices`` is an (M, d) array; for analytic curves it is built by
    refining the parameter grid until consecutive vertices are at most
    ``chord_tol`` apart.
    """

    name: str
    vertices: np.ndarray = field(repr=False)
    chord_tol: float
    closed: bool = True
    func: object = field(default=None, repr=False, compare=False)

    @classmethod
    def analytic(cls, name: str, chord_tol: float = 1e-3) -> "CurveDescriptor":
        if name not in CURVES:
            raise ConfigError(f"unknown curve {name!r}; choose from {sorted(CURVES)}")
        f = CURVES[name]
        m = 256
        while True:
            t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
            v = f(t)
            gaps = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
            if gaps.max() <= chord_tol / 2:
                break
            m = int(m * max(2.0, 2.2 * gaps.max() / chord_tol))
        # thin to roughly uniform arc-length spacing; kept gaps stay <= chord_tol
        arc = np.concatenate([[0.0], np.cumsum(gaps[:-1])])
        bucket = np.floor(arc / (chord_tol / 2)).astype(np.int64)
        keep = np.concatenate([[True], bucket[1:] != bucket[:-1]])
        return cls(name=name, vertices=v[keep], chord_tol=chord_tol, func=f)

    @classmethod
    def polyline(cls, vertices, closed: bool = False) -> "CurveDescriptor":
        v = np.asarray(vertices, dtype=float)
        segs = v[1:] - v[:-1]
        if closed:
            segs = np.vstack([segs, v[:1] - v[-1:]])
        tol = float(np.linalg.norm(segs, axis=1).max()) if len(segs) else 0.0
        return cls(name="polyline", vertices=v, chord_tol=tol, closed=closed)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.vertices
        b = np.roll(a, -1, axis=0) if self.closed else a[1:]
        if not self.closed:
            a = a[:-1]
        return a, b

    def bounding_box(self, pad: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0) - pad, self.vertices.max(axis=0) + pad


def point_segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from points x[i] to segments [a[i], b[i]] (broadcast)."""
    ab = b - a
    denom = np.einsum("...d,...d->...", ab, ab)
    t = np.einsum("...d,...d->...", x - a, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(x - (a + t[..., None] * ab), axis=-1)


class PolylineDistance:
    """Exact distance to a polyline, with a k-d tree over segment midpoints."""

    def __init__(self, curve: CurveDescriptor):
        self.a, self.b = curve.segments()
        mid = 0.5 * (self.a + self.b)
        self.half = 0.5 * np.linalg.norm(self.b - self.a, axis=1)
        self.max_half = float(self.half.max())
        self.tree = cKDTree(mid)

    def __call__(self, x, cutoff: float | None = None, k: int = 128) -> np.ndarray:
        """Distance to the polyline; values above ``cutoff`` are reported as inf."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(len(x), np.inf)
        d1, _ = self.tree.query(x, k=1)
        # the nearest segment is no farther than the nearest midpoint, so its
        # midpoint lies within d1 + max_half
        bound = d1 + self.max_half
        rows = np.arange(len(x))
        if cutoff is not None:
            rows = rows[d1 - self.max_half <= cutoff]
        if len(rows) == 0:
            return out
        k = min(k, len(self.a))
        dm, js = self.tree.query(x[rows], k=k)
        dm, js = dm.reshape(len(rows), k), js.reshape(len(rows), k)
        found = dm <= bound[rows, None] * (1 + 1e-12)
        js = np.where(found, js, 0)
        dist = point_segment_distance(x[rows][:, None, :], self.a[js], self.b[js])
        out[rows] = np.where(found, dist, np.inf).min(axis=1)
        for i in rows[found[:, -1]]:
            out[i] = point_segment_distance(x[i], self.a, self.b).min()
        if cutoff is not None:
            out[out > cutoff] = np.inf
        return out


def sample_curve_tube(n: int, curve: CurveDescriptor, R1: float, box=None, seed=None,
                      max_proposals: int = 10**6, batch: int = 65536) -> PointCloud:
    """Uniform points on the R1-parallel set of a curve, by rejection from a box."""
    if not R1 > 0:
        raise ConfigError(f"R1 must be positive, got {R1}")
    if curve.chord_tol > R1 / 100:
        raise ConfigError(
            f"polyline chord tolerance {curve.chord_tol:g} exceeds R1/100 = {R1 / 100:g}"
        )
    lo, hi = curve.bounding_box(R1) if box is None else map(np.asarray, box)
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    rng = rng_from(seed)
    dist = PolylineDistance(curve)
    kept = []
    total, proposals = 0, 0
    while total < n:
        x = rng.uniform(lo, hi, size=(batch, curve.dim))
        proposals += batch
        x = x[dist(x, cutoff=R1) <= R1]
        kept.append(x)
        total += len(x)
        if proposals >= max_proposals and total < 1e-4 * proposals:
            raise NumericalError("box too large or R1 too small: acceptance rate below 1e-4")
    return PointCloud(np.concatenate(kept)[:n])


def dense_curve_distance(x, curve: CurveDescriptor, m: int = 20000) -> np.ndarray:
    """Distance to an analytic curve by dense parameter search plus local refinement."""
    from scipy.optimize import minimize_scalar

    if curve.func is None:
        raise ConfigError("dense_curve_distance needs an analytic curve")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    pts = curve.func(t)
    tree = cKDTree(pts)
    _, j = tree.query(x, k=1)
    step = 2 * np.pi / m
    out = np.empty(len(x))
    for i, (xi, ji) in enumerate(zip(x, j)):
        # search over the offset from the grid node: the bounded method's
        # tolerance is relative to |offset|, which stays small
        def f(s, xi=xi, t0=t[ji]):
            return float(np.linalg.norm(curve.func(np.array([t0 + s]))[0] - xi))
        res = minimize_scalar(f, bounds=(-step, step), method="bounded",
                              options={"xatol": 1e-14})
        out[i] = min(res.fun, np.linalg.norm(pts[ji] - xi))
    return out


SHAPES = ("sphere", "shell", "superellipse-tube", "trefoil-tube", "circle-tube")


def sample_shape(shape: str, n: int, d: int = 2, A: float = 0.0, R1: float = 0.3,
                 seed=None, chord_tol: float | None = None) -> PointCloud:
    """Dispatch used by the CLI."""
    if shape == "sphere":
        return sample_sphere(n, d, seed)
    if shape == "shell":
        return sample_shell(n, d, A, seed)
    name = {"superellipse-tube": "superellipse", "trefoil-tube": "trefoil",
            "circle-tube": "circle"}.get(shape)
    if name is None:
        raise ConfigError(f"unknown shape {shape!r}; choose from {', '.join(SHAPES)}")
    tol = chord_tol if chord_tol is not None else R1 / 100
    return sample_curve_tube(n, CurveDescriptor.analytic(name, tol), R1, seed=seed)


def unit_sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)
