import math

import numpy as np
import pytest

from rendezsim import (RegionFlag, fd_gradient, fd_hessian,
                       grad_constraint_follower, grad_goal_follower,
                       grad_navfunc_follower, grad_navfunc_leader,
                       navfunc_leader)
from rendezsim.fields import constraint_follower, goal_follower
from rendezsim.gradients import connectivity_slope, follower_potential


def unit(rng):
    a = rng.uniform(-math.pi, math.pi)
    return np.array([math.cos(a), math.sin(a)])


def random_follower_state(rng, n_max=5, d_range=(0.05, 1.95)):
    p = rng.uniform(-10, 10, 2)
    m = int(rng.integers(1, n_max + 1))
    qs = [p + rng.uniform(*d_range) * unit(rng) for _ in range(m)]
    return p, qs


def fd_step(p):
    return 1e-6 * max(1.0, float(np.linalg.norm(p)))


class TestFdOracles:
    def test_gradient_of_quadratic(self):
        g = fd_gradient(lambda p: float(p @ p), np.array([1.0, 2.0]), 1e-5)
        assert np.allclose(g, [2.0, 4.0], atol=1e-8)

    def test_gradient_of_constant(self):
        g = fd_gradient(lambda p: 3.0, np.array([0.3, -0.4]), 1e-5)
        assert np.allclose(g, [0.0, 0.0])

    def test_gradient_of_bilinear(self):
        g = fd_gradient(lambda p: p[0] * p[1], np.array([2.0, 3.0]), 1e-5)
        assert np.allclose(g, [3.0, 2.0], atol=1e-8)

    def test_gradient_rejects_bad_step(self):
        with pytest.raises(ValueError):
            fd_gradient(lambda p: 0.0, np.zeros(2), 0.0)

    def test_gradient_rejects_non_finite_field(self):
        with pytest.raises(ValueError, match="non-finite"):
            fd_gradient(lambda p: math.inf, np.zeros(2), 1e-5)

    def test_hessian_of_quadratic(self):
        h = fd_hessian(lambda p: float(p @ p), np.array([0.7, -1.2]), 1e-4)
        assert np.allclose(h, 2.0 * np.eye(2), atol=1e-4)

    def test_hessian_of_linear(self):
        h = fd_hessian(lambda p: 3.0 * p[0] - 2.0 * p[1] + 1.0,
                       np.array([0.5, 0.5]), 1e-4)
        assert np.allclose(h, np.zeros((2, 2)), atol=1e-6)

    def test_hessian_of_cubic_monomial(self):
        # f = x^2 y: hessian [[2y, 2x], [2x, 0]] at (1, 1)
        h = fd_hessian(lambda p: p[0] ** 2 * p[1], np.array([1.0, 1.0]), 1e-4)
        assert np.allclose(h, [[2.0, 2.0], [2.0, 0.0]], atol=1e-3)

    def test_cross_partials_symmetric_before_averaging(self):
        # both association orders of the four corner samples agree on
        # smooth fields
        rng = np.random.default_rng(1)
        f = lambda p: math.sin(p[0]) * math.exp(0.3 * p[1]) + p[0] * p[1] ** 2
        for _ in range(50):
            p = rng.uniform(-2, 2, 2)
            h = 1e-4
            e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
            fpp, fpm = f(p + e1 + e2), f(p + e1 - e2)
            fmp, fmm = f(p - e1 + e2), f(p - e1 - e2)
            d12 = ((fpp - fmp) - (fpm - fmm)) / (4 * h * h)
            d21 = ((fpp - fpm) - (fmp - fmm)) / (4 * h * h)
            assert abs(d12 - d21) < 1e-6


class TestGoalGradient:
    def test_zero_at_consensus(self):
        p = np.array([2.0, -1.0])
        g = grad_goal_follower(p, [p.copy(), p.copy(), p.copy()])
        assert np.all(g == 0.0)

    def test_single_neighbor(self):
        g = grad_goal_follower(np.array([1.0, 0.0]), [np.array([0.0, 0.0])])
        assert np.allclose(g, [2.0, 0.0])

    def test_matches_fd_with_many_neighbors(self):
        rng = np.random.default_rng(2)
        p = rng.uniform(-3, 3, 2)
        qs = [rng.uniform(-3, 3, 2) for _ in range(5)]
        fd = fd_gradient(lambda x: goal_follower(x, qs), p, 1e-6)
        assert np.allclose(grad_goal_follower(p, qs), fd, atol=1e-8)


class TestConstraintGradient:
    def test_single_neighbor_at_sigmoid_midpoint(self, params_fig2):
        # gradient points toward the neighbor, scaled by the slope magnitude
        p = np.zeros(2)
        q = np.array([1.5, 0.0])  # midpoint of the connectivity sigmoid
        g = grad_constraint_follower(p, [q], RegionFlag.RENDEZVOUS,
                                     params_fig2)
        slope = connectivity_slope(1.5, 2.0, 1.0, 0.01)
        assert slope == pytest.approx(-math.log(99.0) / 2.0, rel=1e-12)
        expected = slope * (p - q) / 1.5
        assert np.allclose(g, expected, rtol=1e-12)
        assert g[0] > 0  # attraction toward the neighbor at (1.5, 0)

    def test_vanishes_deep_inside_sensing_range(self, params_s5):
        # all neighbors well inside the sensing plateau: slope is negligible
        p = np.zeros(2)
        qs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
              np.array([-1.0, 0.1])]
        g = grad_constraint_follower(p, qs, RegionFlag.RENDEZVOUS, params_s5)
        assert float(np.linalg.norm(g)) < 1e-6

    def test_full_mode_matches_fd_in_avoidance_region(self, params_s5):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p, qs = random_follower_state(rng)
            g = grad_constraint_follower(p, qs, RegionFlag.COLLISION_FREE,
                                         params_s5, gradient_mode="full")
            fd = fd_gradient(
                lambda x: constraint_follower(x, qs,
                                              RegionFlag.COLLISION_FREE,
                                              params_s5), p, fd_step(p))
            assert np.linalg.norm(g - fd) <= 1e-6 * max(np.linalg.norm(fd),
                                                        1e-3)


class TestFollowerGradient:
    def test_zero_at_consensus(self, params_s5):
        p = np.array([1.0, 1.0])
        bundle = grad_navfunc_follower(p, [p.copy(), p.copy()],
                                       RegionFlag.RENDEZVOUS, params_s5)
        assert np.all(bundle.gradient == 0.0)

    def test_edge_weight_at_consensus_with_saturated_constraint(self,
                                                                params_s5):
        # goal term zero, single coincident neighbor, constraint product 1:
        # the edge weight reduces to 2 / beta^(1/alpha) = 2
        p = np.array([4.0, -2.0])
        bundle = grad_navfunc_follower(p, [p.copy()], RegionFlag.RENDEZVOUS,
                                       params_s5)
        assert bundle.edge_weights[0] == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("mode", ["full", "paper"])
    @pytest.mark.parametrize("region", [RegionFlag.COLLISION_FREE,
                                        RegionFlag.RENDEZVOUS])
    def test_matches_fd_oracle(self, params_s5, mode, region):
        rng = np.random.default_rng(4)
        for _ in range(100):
            p, qs = random_follower_state(rng)
            bundle = grad_navfunc_follower(p, qs, region, params_s5,
                                           gradient_mode=mode)
            fd = fd_gradient(
                lambda x: follower_potential(x, qs, region, params_s5, mode),
                p, fd_step(p))
            rel = np.linalg.norm(bundle.gradient - fd) / max(
                np.linalg.norm(fd), 1e-9)
            assert rel < 1e-6

    def test_edgewise_decomposition_matches_gradient(self, params_s5):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p, qs = random_follower_state(rng)
            bundle = grad_navfunc_follower(p, qs, RegionFlag.RENDEZVOUS,
                                           params_s5)
            recon = sum(w * (p - q)
                        for w, q in zip(bundle.edge_weights, qs))
            assert np.linalg.norm(recon - bundle.gradient) < 1e-10

    def test_edge_weights_nonnegative_without_collision_terms(self,
                                                              params_s5):
        rng = np.random.default_rng(6)
        for _ in range(200):
            p, qs = random_follower_state(rng)
            bundle = grad_navfunc_follower(p, qs, RegionFlag.RENDEZVOUS,
                                           params_s5)
            assert all(w >= 0.0 for w in bundle.edge_weights)


class TestLeaderGradient:
    def test_zero_at_goal(self, params_s5):
        g = grad_navfunc_leader(params_s5.goal_position.copy(), params_s5)
        assert np.all(g == 0.0)

    def test_points_toward_goal_on_heading_axis(self, params_s5):
        # beyond the goal along the desired heading: descent direction is
        # back toward the goal
        g = grad_navfunc_leader(np.array([3.0, 0.0]), params_s5)
        assert g[0] > 0.0
        assert abs(g[1]) < 1e-12
        fd = fd_gradient(lambda p: navfunc_leader(p, params_s5),
                         np.array([3.0, 0.0]), 1e-6)
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-9)

    def test_matches_fd_oracle(self, params_s5):
        rng = np.random.default_rng(7)
        for _ in range(100):
            p = rng.uniform(-20, 20, 2)
            g = grad_navfunc_leader(p, params_s5)
            fd = fd_gradient(lambda x: navfunc_leader(x, params_s5), p,
                             fd_step(p))
            rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-9)
            assert rel < 1e-6

    def test_workspace_center_special_case(self, params_s5):
        from dataclasses import replace
        params = replace(params_s5, goal_position=np.array([3.0, 0.0]))
        g = grad_navfunc_leader(np.zeros(2), params)
        assert np.all(np.isfinite(g))
