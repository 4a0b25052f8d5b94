"""Divergence balls, intersection witnesses, and the equal-radius center."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robagg import (
    Ball,
    Dist,
    EmptyList,
    HALF_SQNORM,
    InputError,
    Rho,
    ball_contains,
    chernoff_point,
    convex_combine,
    hull_witness,
    intersection_contains,
    kl,
)

from conftest import make_space, rand_dist, simplex_grid

SP2 = make_space(2)
SP3 = make_space(3)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

class TestBallContains:
    def test_center_always_inside(self):
        c = Dist(SP3, (0.2, 0.5, 0.3))
        for r in (0.0, 0.1, 2.0):
            assert ball_contains(Ball(c, r), c)

    def test_kl_boundary_case(self):
        # kl((1,0) || (0.5,0.5)) = log 2 exactly
        b = Ball(Dist(SP2, (1.0, 0.0)), math.log(2.0))
        assert ball_contains(b, Dist(SP2, (0.5, 0.5)))
        assert not ball_contains(b, Dist(SP2, (0.49, 0.51)))

    def test_zero_radius_is_the_center_only(self):
        c = Dist(SP2, (0.3, 0.7))
        b = Ball(c, 0.0)
        assert ball_contains(b, c)
        assert not ball_contains(b, Dist(SP2, (0.31, 0.69)))

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(5)
        c = rand_dist(rng, SP3, floor=0.05)
        q = rand_dist(rng, SP3, floor=0.05)
        r = kl(c, q)
        assert ball_contains(Ball(c, r + 1e-9), q)
        assert not ball_contains(Ball(c, max(r - 1e-6, 0.0)), q)

    def test_negative_radius_rejected(self):
        with pytest.raises(InputError):
            Ball(Dist(SP2, (0.5, 0.5)), -0.1)

    def test_unknown_divergence_tag_rejected(self):
        with pytest.raises(InputError):
            Ball(Dist(SP2, (0.5, 0.5)), 0.1, divergence="hellinger")


def test_rho_ball_membership():
    c = Dist(SP2, (0.7, 0.3))
    q = Dist(SP2, (0.4, 0.6))
    b_tight = Ball(c, 1e-4, divergence=Rho(0.5))
    b_loose = Ball(c, 1.0, divergence=Rho(0.5))
    assert not ball_contains(b_tight, q)
    assert ball_contains(b_loose, q)


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_kl_balls_are_convex(seed):
    rng = np.random.default_rng(seed)
    c = rand_dist(rng, SP3, floor=0.02)
    b = Ball(c, float(rng.uniform(0.01, 0.5)))
    q1 = rand_dist(rng, SP3, floor=0.02)
    q2 = rand_dist(rng, SP3, floor=0.02)
    if ball_contains(b, q1) and ball_contains(b, q2):
        mid = convex_combine((0.5, 0.5), (q1, q2))
        assert ball_contains(b, mid)


def test_intersection_contains_disjoint_pair_rejects_whole_grid():
    balls = [
        Ball(Dist(SP2, (1.0, 0.0)), 0.01),
        Ball(Dist(SP2, (0.0, 1.0)), 0.01),
    ]
    for row in simplex_grid(2, 1e-3):
        assert not intersection_contains(balls, Dist(SP2, row))


def test_intersection_contains_requires_a_ball():
    with pytest.raises(EmptyList):
        intersection_contains([], Dist(SP2, (0.5, 0.5)))


# ---------------------------------------------------------------------------
# hull witness
# ---------------------------------------------------------------------------

def test_witness_found_iff_balls_meet():
    p1 = Dist(SP2, (0.8, 0.2))
    p2 = Dist(SP2, (0.2, 0.8))
    # generous radii: the barycenter is well inside both
    found = hull_witness([p1, p2], [0.5, 0.5])
    assert found.found
    assert ball_contains(Ball(p1, 0.5), found.point)
    assert ball_contains(Ball(p2, 0.5), found.point)
    assert found.weights.min() >= -1e-12
    assert found.weights.sum() == pytest.approx(1.0, abs=1e-8)

    # radii far too small: no witness, and the reported gap is positive
    missed = hull_witness([p1, p2], [0.01, 0.01])
    assert not missed.found
    assert missed.min_gap > 0.0


def test_witness_zero_radius_pins_the_vertex():
    p1 = Dist(SP3, (0.5, 0.3, 0.2))
    p2 = Dist(SP3, (0.2, 0.3, 0.5))
    res = hull_witness([p1, p2], [1e-12, 2.0])
    assert res.found
    np.testing.assert_allclose(res.weights, [1.0, 0.0], atol=1e-5)
    np.testing.assert_allclose(res.point.probs, p1.probs, atol=1e-5)


def test_witness_single_center():
    p = Dist(SP2, (0.6, 0.4))
    res = hull_witness([p], [0.0])
    assert res.found
    np.testing.assert_allclose(res.point.probs, p.probs, atol=1e-12)


def test_witness_duplicate_centers_collapse():
    p = Dist(SP2, (0.6, 0.4))
    res = hull_witness([p, p, p], [0.1, 0.1, 0.1])
    assert res.found
    assert res.weights.shape == (3,)
    assert res.weights.sum() == pytest.approx(1.0, abs=1e-8)


# ---------------------------------------------------------------------------
# the equal-radius center
# ---------------------------------------------------------------------------

def test_center_two_state_symmetric_pair():
    res = chernoff_point([Dist(SP2, (0.9, 0.1)), Dist(SP2, (0.1, 0.9))])
    np.testing.assert_allclose(res.point.probs, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(res.weights, [0.5, 0.5], atol=1e-8)
    expected_r = 0.9 * math.log(1.8) + 0.1 * math.log(0.2)
    assert res.radius == pytest.approx(expected_r, abs=1e-9)


def test_center_two_state_asymmetric_pair_vs_bisection_oracle():
    p1 = np.array([0.8, 0.2])
    p2 = np.array([0.3, 0.7])

    def gap(mu: float) -> float:
        q = mu * p1 + (1.0 - mu) * p2
        d1 = float(np.sum(p1 * np.log(p1 / q)))
        d2 = float(np.sum(p2 * np.log(p2 / q)))
        return d1 - d2

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    mu_star = 0.5 * (lo + hi)
    q_star = mu_star * p1 + (1.0 - mu_star) * p2
    r_star = float(np.sum(p1 * np.log(p1 / q_star)))

    res = chernoff_point([Dist(SP2, p1), Dist(SP2, p2)])
    np.testing.assert_allclose(res.point.probs, q_star, atol=1e-7)
    assert res.radius == pytest.approx(r_star, abs=1e-7)
    np.testing.assert_allclose(res.weights, [mu_star, 1.0 - mu_star], atol=1e-6)


def test_center_frozen_asymmetric_value():
    # pinned output for a fixed instance (guards against silent regressions)
    res = chernoff_point([Dist(SP2, (0.2, 0.8)), Dist(SP2, (0.7, 0.3))])
    assert res.radius == pytest.approx(0.1325561763881013, abs=1e-9)


def test_center_three_state_mirror_pair_has_closed_form():
    # p2 reverses p1, so the midpoint equalizes by symmetry:
    # r = 0.5 log(10/7) + 0.2 log(4/7)
    p1 = Dist(SP3, (0.5, 0.3, 0.2))
    p2 = Dist(SP3, (0.2, 0.3, 0.5))
    res = chernoff_point([p1, p2])
    np.testing.assert_allclose(res.point.probs, [0.35, 0.30, 0.35], atol=1e-8)
    expected = 0.5 * math.log(10.0 / 7.0) + 0.2 * math.log(4.0 / 7.0)
    assert res.radius == pytest.approx(expected, abs=1e-9)
    np.testing.assert_allclose(res.weights, [0.5, 0.5], atol=1e-7)
    assert res.residual <= 1e-8


def test_center_identical_centers_degenerate():
    p = Dist(SP2, (0.4, 0.6))
    res = chernoff_point([p, p])
    assert res.degenerate
    assert res.radius == 0.0
    assert res.point == p


def test_center_euclidean_generator_gives_circumcenter():
    # half-squared-norm: two vertices -> midpoint, radius = d^2/8 = 0.25
    res = chernoff_point(
        [Dist(SP2, (1.0, 0.0)), Dist(SP2, (0.0, 1.0))], generator=HALF_SQNORM
    )
    np.testing.assert_allclose(res.point.probs, [0.5, 0.5], atol=1e-9)
    assert res.radius == pytest.approx(0.25, abs=1e-9)


def test_center_bracketing_property():
    rng = np.random.default_rng(42)
    centers = [rand_dist(rng, SP3, floor=0.05) for _ in range(3)]
    res = chernoff_point(centers)
    r = res.radius
    assert hull_witness(centers, [r + 1e-6] * 3).found
    assert not hull_witness(centers, [max(r - 1e-3, 0.0)] * 3).found


def test_center_equalizes_active_divergences():
    rng = np.random.default_rng(99)
    for _ in range(5):
        centers = [rand_dist(rng, SP3, floor=0.05) for _ in range(2)]
        res = chernoff_point(centers)
        d = [kl(c, res.point) for c in centers]
        # with two distinct centers both must sit on the sphere
        assert max(d) - min(d) <= 1e-7
        assert max(d) == pytest.approx(res.radius, abs=1e-7)
