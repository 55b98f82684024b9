import math

import numpy as np
import pytest

from setscan.errors import ConfigError
from setscan.geometry import PointCloud, diameter
from setscan.noise import (BB, RCONVEX, NoiseEstimate, closeness_index, decide_inner_empty,
                           default_epsilon, epsilon_rule, estimate_noise, estimate_R_bb,
                           estimate_R_rconvex)
from setscan.samplers import sample_shell, sample_sphere


def disk(n, seed, radius=1.0, d=2):
    return sample_shell(n, d, 0.0, seed=seed, inner=0.0, outer=radius)


class TestEpsilonRule:
    def test_value(self):
        assert epsilon_rule(3, 1, 1.0) == pytest.approx(math.log(3) / 3)
        assert epsilon_rule(3, 1, 1.0) == pytest.approx(0.3662, abs=1e-4)

    def test_monotone_and_linear(self):
        vals = [epsilon_rule(n, 2, 1.0) for n in range(3, 200)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert epsilon_rule(100, 3, 2.0) == pytest.approx(2 * epsilon_rule(100, 3, 1.0))

    @pytest.mark.parametrize("args", [(1, 2, 1.0), (10, 0, 1.0), (10, 2, 0.0)])
    def test_errors(self, args):
        with pytest.raises(ConfigError):
            epsilon_rule(*args)


class TestBoundaryBallEstimator:
    def test_circle_gives_zero(self):
        cloud = sample_sphere(500, 2, seed=0)
        assert estimate_R_bb(cloud, 0.1).value == 0.0

    def test_annulus(self):
        hits = 0
        for seed in range(5):
            cloud = sample_shell(5000, 2, 0.2, seed=seed)
            eps = default_epsilon(cloud)
            est = estimate_R_bb(cloud, eps)
            hits += abs(est.value - 0.2) <= 2 * eps
            assert est.tuning == {"epsilon": eps}
        assert hits >= 4

    def test_scale_equivariance(self):
        cloud = sample_shell(1000, 2, 0.2, seed=3)
        a = estimate_R_bb(cloud, 0.15).value
        b = estimate_R_bb(cloud.transformed(scale=2.5), 2.5 * 0.15).value
        assert b == pytest.approx(2.5 * a, rel=1e-9)

    def test_bounds(self):
        cloud = disk(800, 1)
        value = estimate_R_bb(cloud, 0.1).value
        assert 0 <= value <= diameter(cloud)


class TestRConvexEstimator:
    def test_circle_small(self):
        cloud = sample_sphere(2000, 2, seed=0)
        assert estimate_R_rconvex(cloud, 0.2).value <= 0.02

    def test_annulus(self):
        for seed in range(3):
            cloud = sample_shell(5000, 2, 0.2, seed=seed)
            est = estimate_R_rconvex(cloud, 0.1)
            assert abs(est.value - 0.2) <= 0.03
            assert est.value >= 0 and est.tuning == {"r": 0.1}

    def test_scale_equivariance(self):
        cloud = sample_shell(1000, 2, 0.2, seed=3)
        a = estimate_R_rconvex(cloud, 0.1).value
        b = estimate_R_rconvex(cloud.transformed(scale=3.0), 0.3).value
        assert b == pytest.approx(3 * a, rel=1e-7)

    def test_default_radius(self):
        cloud = sample_shell(2000, 2, 0.2, seed=5)
        est = estimate_noise(cloud, RCONVEX)
        assert est.method == RCONVEX and est.value > 0


class TestClosenessIndex:
    def test_circle(self):
        assert closeness_index(sample_sphere(1000, 2, seed=1), 0.1) <= 0.05

    def test_disk(self):
        cloud = disk(5000, 2)
        assert closeness_index(cloud) >= 0.7

    def test_scale_invariant(self):
        cloud = disk(1000, 3)
        a = closeness_index(cloud, 0.1)
        b = closeness_index(cloud.transformed(scale=4.0), 0.4)
        assert a == pytest.approx(b, rel=1e-9)


class TestDecision:
    def test_arithmetic(self):
        assert decide_inner_empty(0.21, 0.2, 0.02)
        assert not decide_inner_empty(0.35, 0.2, 0.02)
        est = NoiseEstimate(BB, 0.21, {}, 10, 2)
        assert decide_inner_empty(est, 0.2, 0.02)

    def test_errors(self):
        with pytest.raises(ConfigError):
            decide_inner_empty(0.2, -1.0, 0.1)
        with pytest.raises(ConfigError):
            decide_inner_empty(0.2, 0.2, 0.0)

    def test_sphere_tube_vs_ball_tube(self):
        for seed in range(2):
            tube = sample_shell(10**4, 3, 0.2, seed=seed)
            ball = disk(10**4, seed, radius=1.2, d=3)
            decisions = []
            for cloud in (tube, ball):
                eps = default_epsilon(cloud)
                decisions.append(decide_inner_empty(estimate_R_bb(cloud, eps), 0.2, 2 * eps))
            assert decisions == [True, False]


def test_unknown_method():
    with pytest.raises(ConfigError):
        estimate_noise(PointCloud([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), "kde")


def test_errors_shrink_with_n():
    # median absolute error over seeds as n doubles from 1e3 to 8e3
    ns = [1000, 2000, 4000, 8000]
    med_bb, med_rc = [], []
    for n in ns:
        bb, rc = [], []
        for seed in range(10):
            cloud = sample_shell(n, 2, 0.2, seed=1000 * seed + n)
            bb.append(abs(estimate_R_bb(cloud).value - 0.2))
            rc.append(abs(estimate_R_rconvex(cloud, 0.1).value - 0.2))
        med_bb.append(np.median(bb))
        med_rc.append(np.median(rc))
    assert all(a > b for a, b in zip(med_bb, med_bb[1:])), med_bb
    assert all(a > b for a, b in zip(med_rc, med_rc[1:])), med_rc
