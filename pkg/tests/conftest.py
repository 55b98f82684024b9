"""Independent oracles shared by the test modules.

None of these use Delaunay or Voronoi machinery from the package: they are
slow, direct evaluations of the defining geometric conditions.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.stats import special_ortho_group


def random_rotation(d: int, seed: int) -> np.ndarray:
    return special_ortho_group.rvs(d, random_state=seed)


def brute_force_empty_sphere(points: np.ndarray, simplices: np.ndarray, tol: float = 1e-9
                             ) -> int:
    """Count simplices whose circumsphere strictly contains another input point.

    The circumcenter is solved per simplex from |c - p_0|^2 = |c - p_k|^2.
    """
    violations = 0
    for simplex in simplices:
        p = points[simplex]
        a = 2 * (p[1:] - p[0])
        b = (p[1:] ** 2).sum(1) - (p[0] ** 2).sum()
        c = np.linalg.solve(a, b)
        rad = np.linalg.norm(p[0] - c)
        others = np.delete(np.arange(len(points)), simplex)
        d = np.linalg.norm(points[others] - c, axis=1)
        violations += int(np.any(d < rad - tol * max(1.0, rad)))
    return violations


def _sphere_directions(d: int, m: int, rng) -> np.ndarray:
    if d == 2:
        t = np.linspace(0, 2 * np.pi, m, endpoint=False)
        return np.c_[np.cos(t), np.sin(t)]
    u = rng.normal(size=(m, d))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def boundary_ball_margin(points: np.ndarray, i: int, r: float, m: int = 10000,
                         rng=None) -> float:
    """max over unit u of min_{j != i} |X_i + r u - X_j| - r.

    The ball B(X_i + r u, r) touches X_i; it is empty of the other points
    exactly when the inner minimum is >= r. The maximum is found by dense
    sampling of directions and refined from the best few by Nelder-Mead.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    d = points.shape[1]
    x = points[i]
    others = np.delete(points, i, axis=0)
    # a ball of radius r touching x lies inside B(x, 2r); farther points cannot enter it
    others = others[np.linalg.norm(others - x, axis=1) < 2 * r + 1e-9]
    if len(others) == 0:
        return np.inf

    def margin(u):
        u = np.atleast_2d(u)
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        y = x + r * u
        dist = np.sqrt(((y[:, None, :] - others[None, :, :]) ** 2).sum(-1))
        return dist.min(1) - r

    dirs = _sphere_directions(d, m, rng)
    vals = margin(dirs)
    best = float(vals.max())
    if abs(best) > 0.05 * r:
        # the sampled extremum is far from the decision threshold
        return best
    for k in np.argsort(vals)[-3:]:
        res = minimize(lambda u: -margin(u)[0], dirs[k], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return best


def circle_intersections(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    """Intersection points of the circles S(a, r) and S(b, r) in the plane."""
    m = 0.5 * (a + b)
    half = 0.5 * np.linalg.norm(b - a)
    if half == 0 or half > r:
        return np.empty((0, 2))
    h = np.sqrt(max(r * r - half * half, 0.0))
    n = np.array([-(b - a)[1], (b - a)[0]]) / (2 * half)
    return np.array([m + h * n, m - h * n])


class PlanarRHull:
    """Exact membership in the closed r-convex hull of a planar point set.

    x lies outside the hull iff some open r-ball avoiding the sample contains
    x, i.e. iff dist(x, E) < r with E = {z : d(z, sample) >= r}. The closest
    point of E to an outside x lies on its boundary, which is made of arcs of
    the circles S(Y_j, r); it is either the foot of x on one of those
    circles or an intersection of two of them.
    """

    def __init__(self, points: np.ndarray, r: float):
        self.points = np.asarray(points, dtype=float)
        self.r = float(r)
        verts = [circle_intersections(self.points[i], self.points[j], r)
                 for i, j in itertools.combinations(range(len(self.points)), 2)]
        verts = np.concatenate(verts) if verts else np.empty((0, 2))
        self.vertices = verts[self._in_E(verts)] if len(verts) else verts

    def _in_E(self, z: np.ndarray) -> np.ndarray:
        d = np.sqrt(((z[:, None, :] - self.points[None]) ** 2).sum(-1)).min(1)
        return d >= self.r - 1e-12

    def dist_to_E(self, x: np.ndarray) -> float:
        if self._in_E(x[None])[0]:
            return 0.0
        diff = x - self.points
        norm = np.linalg.norm(diff, axis=1)
        safe = np.where(norm > 0, norm, 1.0)
        feet = self.points + self.r * diff / safe[:, None]
        cand = np.concatenate([feet[self._in_E(feet)], self.vertices])
        if len(cand) == 0:
            return np.inf
        return float(np.linalg.norm(cand - x, axis=1).min())

    def contains(self, x: np.ndarray) -> bool:
        return self.dist_to_E(x) >= self.r

    def exit_point(self, start: np.ndarray, u: np.ndarray, step: float,
                   reach: float) -> np.ndarray | None:
        """First point where the ray start + t u leaves the hull, by marching and bisection."""
        t = 0.0
        while t < reach:
            t_next = t + step
            if not self.contains(start + t_next * u):
                lo, hi = t, t_next
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if self.contains(start + mid * u):
                        lo = mid
                    else:
                        hi = mid
                return start + lo * u
            t = t_next
        return None


def hausdorff_brute(a: np.ndarray, b: np.ndarray) -> float:
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return float(max(d.min(1).max(), d.min(0).max()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
