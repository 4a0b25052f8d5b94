"""Divergence families: KL, phi-divergences, rho-divergences, Bregman."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robagg import (
    BUILTIN_GENERATORS,
    BUILTIN_PHI_SPECS,
    CHI2_PHI,
    DimensionMismatch,
    Dist,
    DomainError,
    HALF_SQNORM,
    KL_PHI,
    NEG_ENTROPY,
    RhoOutOfRange,
    bregman,
    kl,
    phi_divergence,
    rho_divergence,
)

from conftest import make_space, rand_dist

SP2 = make_space(2)
SP3 = make_space(3)


# ---------------------------------------------------------------------------
# KL
# ---------------------------------------------------------------------------

def test_kl_hand_value():
    # 0.5 log 2 + 0.5 log(2/3) = 0.5 log(4/3)
    p = Dist(SP2, (0.5, 0.5))
    q = Dist(SP2, (0.25, 0.75))
    assert kl(p, q) == pytest.approx(0.14384103622589045, abs=1e-14)
    assert kl(p, q) == pytest.approx(0.5 * math.log(4.0 / 3.0), abs=1e-14)


def test_kl_identity_and_absolute_continuity():
    p = Dist(SP3, (0.2, 0.3, 0.5))
    assert kl(p, p) == 0.0
    q = Dist(SP3, (0.5, 0.5, 0.0))
    assert kl(p, q) == math.inf
    # support(q) inside support(p) is fine the other way around
    assert math.isfinite(kl(q, p))


def test_kl_space_mismatch():
    with pytest.raises(DimensionMismatch):
        kl(Dist(SP2, (0.5, 0.5)), Dist(SP3, (0.4, 0.3, 0.3)))


@given(st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_kl_nonnegative_zero_only_at_equality(seed):
    rng = np.random.default_rng(seed)
    p = rand_dist(rng, SP3, floor=1e-3)
    q = rand_dist(rng, SP3, floor=1e-3)
    d = kl(p, q)
    assert d >= 0.0
    if d < 1e-12:
        np.testing.assert_allclose(p.probs, q.probs, atol=1e-5)


# ---------------------------------------------------------------------------
# phi-divergences and their conjugates
# ---------------------------------------------------------------------------

def test_phi_kl_spec_matches_kl():
    rng = np.random.default_rng(3)
    for _ in range(10):
        p = rand_dist(rng, SP3, floor=1e-3)
        q = rand_dist(rng, SP3, floor=1e-3)
        assert phi_divergence(KL_PHI, p, q) == pytest.approx(kl(p, q), abs=1e-12)


def test_phi_chi2_hand_value():
    # sum_s q phi(p/q) with phi(t) = (t-1)^2/2 at p=(0.6,0.4), q=(0.5,0.5):
    # both states contribute 0.5 * (0.04/2) = 0.01, total 0.02.
    p = Dist(SP2, (0.6, 0.4))
    q = Dist(SP2, (0.5, 0.5))
    assert phi_divergence(CHI2_PHI, p, q) == pytest.approx(0.02, abs=1e-15)


def test_phi_generators_nonnegative_and_zero_at_one():
    for spec in BUILTIN_PHI_SPECS.values():
        assert spec.phi(1.0) == pytest.approx(0.0, abs=1e-15)
        for t in (0.0, 0.3, 1.7, 5.0):
            assert spec.phi(t) >= -1e-15
    with pytest.raises(DomainError):
        KL_PHI.phi(-0.1)


@given(
    st.sampled_from(["kl", "chi2"]),
    st.floats(-0.99, 3.0),
    st.floats(0.001, 6.0),
)
@settings(max_examples=120, deadline=None)
def test_conjugate_is_fenchel_upper_bound(name, t, x):
    # phi*(t) = sup_x (t x - phi(x)) implies phi*(t) >= t x - phi(x) always
    spec = BUILTIN_PHI_SPECS[name]
    assert spec.conjugate(t) >= t * x - spec.phi(x) - 1e-10


def test_conjugate_attains_supremum_on_a_grid():
    # vectorized reference transcriptions of the two generators
    xs = np.linspace(1e-12, 20.0, 400001)
    refs = {
        "kl": xs * np.log(xs) - xs + 1.0,
        "chi2": 0.5 * (xs - 1.0) ** 2,
    }
    for name, spec in BUILTIN_PHI_SPECS.items():
        for t in (-0.5, 0.0, 0.8):
            sup = float(np.max(t * xs - refs[name]))
            assert spec.conjugate(t) == pytest.approx(sup, abs=1e-6), name


# ---------------------------------------------------------------------------
# rho-divergences
# ---------------------------------------------------------------------------

def test_rho_bounds_enforced():
    p = Dist(SP2, (0.5, 0.5))
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(RhoOutOfRange):
            rho_divergence(bad, p, p)


def test_rho_identity_and_nonnegativity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = rand_dist(rng, SP3, floor=1e-3)
        q = rand_dist(rng, SP3, floor=1e-3)
        rho = float(rng.uniform(0.05, 0.95))
        assert rho_divergence(rho, p, p) == pytest.approx(0.0, abs=1e-12)
        assert rho_divergence(rho, p, q) >= -1e-12


def test_rho_skew_symmetry():
    # D_rho(p, q) = D_{1-rho}(q, p) for the power-mean family
    rng = np.random.default_rng(12)
    p = rand_dist(rng, SP3, floor=1e-3)
    q = rand_dist(rng, SP3, floor=1e-3)
    for rho in (0.2, 0.5, 0.77):
        assert rho_divergence(rho, p, q) == pytest.approx(
            rho_divergence(1.0 - rho, q, p), rel=1e-12
        )


def test_rho_limits_interpolate_both_kl_orientations():
    rng = np.random.default_rng(13)
    p = rand_dist(rng, SP3, floor=0.05)
    q = rand_dist(rng, SP3, floor=0.05)
    assert rho_divergence(1e-7, p, q) == pytest.approx(kl(p, q), abs=1e-5)
    assert rho_divergence(1.0 - 1e-7, p, q) == pytest.approx(kl(q, p), abs=1e-5)


# ---------------------------------------------------------------------------
# Bregman divergences
# ---------------------------------------------------------------------------

def test_bregman_negative_entropy_equals_kl_on_full_support():
    rng = np.random.default_rng(21)
    for _ in range(10):
        p = rand_dist(rng, SP3, floor=1e-3)
        q = rand_dist(rng, SP3, floor=1e-3)
        assert bregman(NEG_ENTROPY, p, q) == pytest.approx(kl(p, q), abs=1e-12)


def test_bregman_half_sqnorm_is_squared_distance():
    p = Dist(SP2, (0.9, 0.1))
    q = Dist(SP2, (0.4, 0.6))
    expected = 0.5 * float(np.sum((p.probs - q.probs) ** 2))
    assert bregman(HALF_SQNORM, p, q) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.25, abs=1e-15)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_bregman_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p = rand_dist(rng, SP3, floor=1e-3)
    q = rand_dist(rng, SP3, floor=1e-3)
    for gen in BUILTIN_GENERATORS.values():
        assert bregman(gen, p, q) >= -1e-12


def test_builtin_registries_expose_expected_names():
    assert set(BUILTIN_PHI_SPECS) == {"kl", "chi2"}
    assert set(BUILTIN_GENERATORS) == {"negative-entropy", "half-squared-norm"}
