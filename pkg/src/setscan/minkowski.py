"""Minkowski content estimation from the Monte Carlo volume of a union of balls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import PointCloud, as_cloud, maxmin_nn
from .samplers import _directions

CHUNK = 1 << 16

# r0(n, d) used for the noisy case with R1 = 0.2
TABLE2_RADII = {
    2: {10**3: 0.11, 10**4: 0.10, 10**5: 0.08, 10**6: 0.07},
    3: {10**3: 0.14, 10**4: 0.14, 10**5: 0.13, 10**6: 0.12},
    4: {10**3: 0.16, 10**4: 0.16, 10**5: 0.16, 10**6: 0.15},
}


def table2_radius(n: int, d: int) -> float:
    """Tabulated radius for (n, d), falling back to the nearest tabulated n (log scale)."""
    if d not in TABLE2_RADII:
        raise ConfigError(f"no tabulated radius for d={d}; tabulated: {sorted(TABLE2_RADII)}")
    row = TABLE2_RADII[d]
    best = min(row, key=lambda m: abs(math.log10(m) - math.log10(max(n, 1))))
    return row[best]


def unit_ball_volume(k: int) -> float:
    if k < 0:
        raise ConfigError(f"dimension must be >= 0, got {k}")
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


@dataclass(frozen=True)
class BoxRegion:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ConfigError("sampling region without positive volume")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(size, self.dim))

    def describe(self) -> dict:
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class ShellRegion:
    """The spherical shell inner <= |x - center| <= outer."""

    inner: float
    outer: float
    dim: int
    center: np.ndarray = field(default=None)

    def __post_init__(self):
        inner = max(0.0, float(self.inner))
        if not self.outer > inner:
            raise ConfigError("sampling region without positive volume")
        object.__setattr__(self, "inner", inner)
        c = np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)

    @classmethod
    def around_unit_sphere(cls, r: float, dim: int) -> "ShellRegion":
        """B(0, 1+2r) minus the open ball B(0, 1-2r)."""
        return cls(inner=1 - 2 * r, outer=1 + 2 * r, dim=dim)

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dim) * (self.outer**self.dim - self.inner**self.dim)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = _directions(rng, size, self.dim)
        lo, hi = self.inner**self.dim, self.outer**self.dim
        radius = (rng.random(size) * (hi - lo) + lo) ** (1.0 / self.dim)
        return self.center + radius[:, None] * u

    def describe(self) -> dict:
        return {"kind": "shell", "inner": self.inner, "outer": self.outer,
                "center": self.center.tolist()}


def bounding_box_region(cloud, r: float) -> BoxRegion:
    pts = as_cloud(cloud).points
    return BoxRegion(pts.min(axis=0) - r, pts.max(axis=0) + r)


def mc_union_volume(cloud, r: float, region=None, N: int = 10**5, seed=0) -> tuple[float, int]:
    """Monte Carlo volume of the union of closed balls B(X_i, r).

    Samples are drawn in fixed-size chunks, each from its own child of
    ``SeedSequence(seed)``, so hit counts do not depend on how chunks are
    scheduled.
    """
    cloud = as_cloud(cloud)
    r = float(r)
    if not r > 0:
        raise ConfigError(f"radius must be positive, got {r}")
    N = int(N)
    if N <= 0:
        raise ConfigError(f"number of Monte Carlo points must be positive, got {N}")
    if region is None:
        region = bounding_box_region(cloud, r)
    if region.dim != cloud.dim:
        raise ConfigError("region dimension does not match the cloud")
    if not region.volume > 0:
        raise ConfigError("sampling region without positive volume")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    n_chunks = -(-N // CHUNK)
    hits = 0
    for c, child in enumerate(ss.spawn(n_chunks)):
        size = min(CHUNK, N - c * CHUNK)
        x = region.sample(np.random.default_rng(child), size)
        hits += int(np.count_nonzero(cloud.index.count_within(x, r)))
    return hits / N * region.volume, hits


@dataclass(frozen=True)
class MinkowskiEstimate:
    value: float
    r_used: float
    d_prime: int
    mc_points: int
    mc_hits: int
    region: dict
    region_volume: float
    n_points: int = 0

    @property
    def hit_fraction(self) -> float:
        return self.mc_hits / self.mc_points

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "r_used": self.r_used,
            "d_prime": self.d_prime,
            "mc_points": self.mc_points,
            "mc_hits": self.mc_hits,
            "region": self.region,
            "region_volume": self.region_volume,
            "n_points": self.n_points,
        }


def auto_radius(cloud) -> float:
    """0.5 * sqrt(max_i min_{j != i} |X_i - X_j|)."""
    return 0.5 * math.sqrt(maxmin_nn(cloud))


def minkowski_from_cloud(cloud, d_prime: int, r: float, N: int = 10**5, seed=0,
                         region=None) -> MinkowskiEstimate:
    cloud = as_cloud(cloud)
    d = cloud.dim
    if not 0 <= d_prime <= d:
        raise ConfigError(f"need 0 <= d_prime <= d={d}, got {d_prime}")
    if region == "shell":
        region = ShellRegion.around_unit_sphere(r, d)
    if region is None:
        region = bounding_box_region(cloud, r)
    vol, hits = mc_union_volume(cloud, r, region, N, seed)
    k = d - d_prime
    value = vol / (unit_ball_volume(k) * r**k)
    return MinkowskiEstimate(value=value, r_used=r, d_prime=d_prime, mc_points=int(N),
                             mc_hits=hits, region=region.describe(),
                             region_volume=region.volume, n_points=cloud.n)


def minkowski_noiseless(cloud, d_prime: int, r: float | str = "auto", N: int = 10**5,
                        seed=0, region=None) -> MinkowskiEstimate:
    """d'-dimensional Minkowski content from a noiseless sample.

    ``r="auto"`` uses 0.5 * sqrt(connectivity statistic).
    """
    cloud = as_cloud(cloud)
    if isinstance(r, str):
        if r.lower() != "auto":
            raise ConfigError(f"radius must be a number or 'auto', got {r!r}")
        r = auto_radius(cloud)
    r = float(r)
    if not r > 0:
        raise ConfigError(f"radius must be positive, got {r}")
    return minkowski_from_cloud(cloud, d_prime, r, N, seed, region)


def minkowski_noisy(cloud, d_prime: int, denoise_config=None, r: float | None = None,
                    N: int = 10**5, seed=0, region=None):
    """Denoise a tube sample, then estimate the content of the denoised points.

    Returns ``(estimate, denoise_result)``. When ``r`` is None the tabulated
    radius for (n, d) is used.
    """
    from .denoise import DenoiseConfig, denoise

    cloud = as_cloud(cloud)
    config = denoise_config if denoise_config is not None else DenoiseConfig()
    result = denoise(cloud, config)
    if r is None:
        r = table2_radius(cloud.n, cloud.dim)
    est = minkowski_from_cloud(PointCloud(result.denoised), d_prime, float(r), N, seed, region)
    return est, result
