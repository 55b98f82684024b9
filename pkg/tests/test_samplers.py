import math

import numpy as np
import pytest
from scipy import stats

from setscan.errors import ConfigError, NumericalError
from setscan.samplers import (CurveDescriptor, PolylineDistance, dense_curve_distance,
                              point_segment_distance, sample_curve_tube, sample_shape,
                              sample_shell, sample_sphere, shell_radius_cdf, substream,
                              unit_sphere_area)


def chi2_sectors(points, k=8):
    """Chi-square p-value of the counts in k equal angular sectors."""
    ang = np.arctan2(points[:, 1], points[:, 0])
    counts = np.bincount(((ang + np.pi) / (2 * np.pi) * k).astype(int) % k, minlength=k)
    return stats.chisquare(counts).pvalue


class TestSphere:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_unit_norm(self, d):
        pts = sample_sphere(1000, d, seed=0).points
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_mean_bound(self):
        for seed in range(5):
            pts = sample_sphere(10**4, 3, seed=seed).points
            assert np.linalg.norm(pts.mean(0)) <= 4 / math.sqrt(10**4)

    def test_reproducible(self):
        a = sample_sphere(100, 3, seed=7).points
        b = sample_sphere(100, 3, seed=7).points
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_sphere(100, 3, seed=8).points)

    def test_octants_uniform(self):
        pts = sample_sphere(8000, 3, seed=1).points
        cell = (pts > 0) @ np.array([1, 2, 4])
        assert stats.chisquare(np.bincount(cell, minlength=8)).pvalue > 1e-3


class TestShell:
    def test_radii_range(self):
        r = np.linalg.norm(sample_shell(5000, 3, 0.3, seed=0).points, axis=1)
        assert r.min() >= 0.7 and r.max() <= 1.3

    def test_degenerate(self):
        r = np.linalg.norm(sample_shell(100, 2, 0.0, seed=0).points, axis=1)
        np.testing.assert_allclose(r, 1.0, atol=1e-12)

    @pytest.mark.parametrize("d,A", [(2, 0.2), (3, 0.1), (4, 0.5)])
    def test_radial_ks(self, d, A):
        n = 10**4
        r = np.linalg.norm(sample_shell(n, d, A, seed=d).points, axis=1)
        ks = stats.kstest(r, lambda x: shell_radius_cdf(x, d, A)).statistic
        assert ks <= 1.63 / math.sqrt(n)

    def test_angular_uniformity(self):
        assert chi2_sectors(sample_shell(8000, 2, 0.3, seed=2).points) > 1e-3

    @pytest.mark.parametrize("A", [-0.1, 1.0, 1.5])
    def test_bad_width(self, A):
        with pytest.raises(ConfigError):
            sample_shell(10, 2, A, seed=0)


class TestCurves:
    @pytest.mark.parametrize("name", ["circle", "superellipse", "trefoil"])
    def test_polyline_on_curve(self, name):
        curve = CurveDescriptor.analytic(name, 2e-3)
        a, b = curve.segments()
        assert np.linalg.norm(b - a, axis=1).max() <= curve.chord_tol
        # vertices are curve points
        assert dense_curve_distance(curve.vertices[::50], curve).max() <= 1e-9

    def test_superellipse_equation(self):
        v = CurveDescriptor.analytic("superellipse", 1e-3).vertices
        np.testing.assert_allclose(np.abs(v[:, 0]) ** 3 + np.abs(v[:, 1]) ** 3, 1.0, atol=1e-12)

    def test_polyline_distance_against_brute_force(self, rng):
        curve = CurveDescriptor.analytic("trefoil", 5e-3)
        q = rng.uniform(-3, 3, size=(3000, 3))
        a, b = curve.segments()
        brute = np.array([point_segment_distance(x, a, b).min() for x in q])
        np.testing.assert_allclose(PolylineDistance(curve)(q), brute, atol=1e-12)

    def test_unknown_curve(self):
        with pytest.raises(ConfigError):
            CurveDescriptor.analytic("lemniscate")


class TestCurveTube:
    @pytest.mark.parametrize("shape", ["superellipse-tube", "trefoil-tube"])
    def test_within_tube(self, shape):
        R1 = 0.3
        cloud = sample_shape(shape, 2000, R1=R1, seed=0)
        name = shape.split("-")[0]
        curve = CurveDescriptor.analytic(name, R1 / 100)
        d = dense_curve_distance(cloud.points[:300], curve)
        assert d.max() <= R1 + curve.chord_tol

    def test_circle_tube_matches_shell(self):
        tube = sample_shape("circle-tube", 5000, R1=0.2, seed=1).points
        shell = sample_shell(5000, 2, 0.2, seed=2).points
        res = stats.ks_2samp(np.linalg.norm(tube, axis=1), np.linalg.norm(shell, axis=1))
        assert res.pvalue > 0.05
        assert chi2_sectors(tube) > 1e-3

    def test_chord_tolerance_enforced(self):
        with pytest.raises(ConfigError):
            sample_curve_tube(10, CurveDescriptor.analytic("circle", 0.01), 0.2, seed=0)

    def test_low_acceptance(self):
        seg = CurveDescriptor.polyline([[0.0, 0.0], [1e-3, 0.0]])
        with pytest.raises(NumericalError, match="box too large or R1 too small"):
            sample_curve_tube(10, seg, 0.1, box=([-1e3, -1e3], [1e3, 1e3]), seed=0)

    def test_bad_radius(self):
        with pytest.raises(ConfigError):
            sample_curve_tube(10, CurveDescriptor.analytic("circle", 1e-3), 0.0)


def test_unknown_shape():
    with pytest.raises(ConfigError):
        sample_shape("torus", 10)


def test_substreams_are_independent_of_order():
    a = np.random.default_rng(substream(1, "x", 2)).random(5)
    np.random.default_rng(substream(1, "y", 3)).random(5)
    b = np.random.default_rng(substream(1, "x", 2)).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, np.random.default_rng(substream(2, "x", 2)).random(5))


def test_unit_sphere_area():
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_sphere_area(4) == pytest.approx(2 * math.pi**2)
