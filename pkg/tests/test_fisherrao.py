import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from gaussgeo import (MVN, InvalidInput, NumericalFailure, TangentVector, affine_apply,
                      calvo_oller_lower_bound, embed, fr_distance, fr_distance_approx,
                      fr_distance_same_cov, fr_distance_same_mean, fr_distance_univariate,
                      fr_geodesic, fr_geodesic_bvp, fr_geodesic_ivp_calvo_oller,
                      fr_geodesic_ivp_eriksen, fr_length_approx, jeffreys)
from gaussgeo.fisherrao import fisher_norm, moment_tangent, natural_tangent
from gaussgeo.matcore import spd_geodesic, spd_trace_distance

from helpers import SWAP_PAIR, mvn_err, random_affine, random_mvn

# reference length of the swapped-variance geodesic, from a separate shooting run at tight tolerance
SWAP_PAIR_LENGTH = 3.1329316710671


def random_tangent(rng, d, scale=1.0):
    B = rng.normal(scale=scale, size=(d, d))
    return TangentVector(rng.normal(scale=scale, size=d), (B + B.T) / 2)


# ---------------------------------------------------------------------------
# closed forms

def test_univariate_examples():
    N = MVN(0.3, 2.0)
    assert fr_distance_univariate(N, N) == 0.0
    ref = math.sqrt(2) * math.log(2)
    assert fr_distance_univariate(MVN(0.0, 1.0), MVN(1.0, 1.0)) == pytest.approx(ref, rel=1e-14)
    assert fr_distance_univariate(MVN(0.0, 1.0), MVN(0.0, 4.0)) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(InvalidInput):
        fr_distance_univariate(MVN.standard(2), MVN.standard(2))


def test_univariate_metric_axioms():
    rng = np.random.default_rng(0)
    for _ in range(100):
        A, B, C = (random_mvn(rng, 1) for _ in range(3))
        ab = fr_distance_univariate(A, B)
        assert ab == pytest.approx(fr_distance_univariate(B, A), rel=1e-12)
        assert ab <= fr_distance_univariate(A, C) + fr_distance_univariate(C, B) + 1e-12


def test_same_mean_examples():
    N = MVN([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]])
    assert fr_distance_same_mean(N, N) == pytest.approx(0, abs=1e-7)
    e2 = math.e ** 2
    assert fr_distance_same_mean(MVN.standard(2), MVN([0.0, 0.0], e2 * np.eye(2))) == pytest.approx(2.0, rel=1e-14)
    assert fr_distance_same_mean(MVN.standard(2), MVN([0.0, 0.0], np.diag([e2, 1.0]))) == pytest.approx(math.sqrt(2), rel=1e-14)
    with pytest.raises(InvalidInput):
        fr_distance_same_mean(MVN.standard(2), MVN([1.0, 0.0], np.eye(2)))


def test_same_mean_is_half_trace_distance():
    rng = np.random.default_rng(1)
    for _ in range(20):
        N0 = random_mvn(rng, 3)
        N1 = MVN(N0.mean, random_mvn(rng, 3).cov)
        ref = spd_trace_distance(N0.cov, N1.cov, 1 / math.sqrt(2))
        assert fr_distance_same_mean(N0, N1) == pytest.approx(ref, rel=1e-12)


def test_same_cov_examples():
    N = MVN([0.0, 0.0], np.eye(2))
    assert fr_distance_same_cov(N, N) == 0.0
    val = fr_distance_same_cov(N, MVN([2.0, 0.0], np.eye(2)))
    assert val == pytest.approx(math.sqrt(2) * math.acosh(2), rel=1e-14)
    u = fr_distance_same_cov(MVN(0.0, 1.0), MVN(1.0, 1.0))
    assert u == pytest.approx(fr_distance_univariate(MVN(0.0, 1.0), MVN(1.0, 1.0)), rel=1e-12)
    assert fr_distance_approx(MVN(0.0, 1.0), MVN(1.0, 1.0), 1e-3).value == pytest.approx(u, rel=1e-2)
    with pytest.raises(InvalidInput):
        fr_distance_same_cov(N, MVN([0.0, 0.0], 2 * np.eye(2)))


def test_same_cov_monotone_in_mahalanobis():
    vals = [fr_distance_same_cov(MVN(0.0, 1.0), MVN(x, 1.0)) for x in np.linspace(0, 5, 11)]
    assert np.all(np.diff(vals) > 0)


def test_same_cov_matches_shooting():
    rng = np.random.default_rng(2)
    for _ in range(10):
        N0 = random_mvn(rng, 3)
        N1 = MVN(N0.mean + rng.normal(size=3), N0.cov)
        assert fr_distance(N0, N1) == pytest.approx(fr_distance_same_cov(N0, N1), rel=1e-9)


# ---------------------------------------------------------------------------
# tangent coordinates and initial-value geodesics

def test_tangent_coordinate_roundtrip():
    rng = np.random.default_rng(3)
    N = random_mvn(rng, 3)
    v = random_tangent(rng, 3)
    w = moment_tangent(N, *natural_tangent(N, v))
    assert_allclose(w.dmean, v.dmean, atol=1e-10)
    assert_allclose(w.dcov, v.dcov, atol=1e-10)


def test_eriksen_examples():
    assert fr_geodesic_ivp_eriksen(random_tangent(np.random.default_rng(4), 2), 0).allclose(MVN.standard(2))
    v = TangentVector([0.0, 0.0], -np.diag([0.5, 1.5]))
    for t in (0.3, 1.0, 2.0):
        Nt = fr_geodesic_ivp_eriksen(v, t, coords="natural")
        assert_allclose(Nt.mean, 0, atol=1e-14)
        # natural dXi = -dcov at N(0, I), so the covariance grows as exp(t * diag)
        assert_allclose(Nt.cov, np.diag(np.exp(t * np.array([0.5, 1.5]))), rtol=1e-12)


def test_eriksen_is_unit_speed_geodesic():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = int(rng.integers(1, 4))
        v = random_tangent(rng, d, 0.5)
        speed = fisher_norm(MVN.standard(d), v)
        for s, t in [(0.0, 1.0), (0.2, 0.7), (0.5, 1.5)]:
            dist = fr_distance(fr_geodesic_ivp_eriksen(v, s), fr_geodesic_ivp_eriksen(v, t))
            assert dist == pytest.approx(abs(t - s) * speed, rel=1e-8)


def test_eriksen_velocity_at_origin():
    rng = np.random.default_rng(6)
    v = random_tangent(rng, 3)
    h = 1e-6
    Np, Nm = fr_geodesic_ivp_eriksen(v, h), fr_geodesic_ivp_eriksen(v, -h)
    assert_allclose((Np.mean - Nm.mean) / (2 * h), v.dmean, atol=1e-6)
    assert_allclose((Np.cov - Nm.cov) / (2 * h), v.dcov, atol=1e-6)


def test_calvo_oller_examples():
    rng = np.random.default_rng(7)
    N0 = random_mvn(rng, 2)
    v = random_tangent(rng, 2)
    assert fr_geodesic_ivp_calvo_oller(N0, v, 0) is N0
    # a = 0 stays in the fixed-mean slice, on the affine-invariant geodesic
    v0 = TangentVector([0.0, 0.0], v.dcov)
    for t in (0.25, 0.7, 1.0):
        Nt = fr_geodesic_ivp_calvo_oller(N0, v0, t)
        w, V = np.linalg.eigh(N0.cov)
        R = (V * np.sqrt(w)) @ V.T
        Ri = np.linalg.inv(R)
        C = Ri @ v0.dcov @ Ri
        cw, cV = np.linalg.eigh(C)
        ref = R @ (cV * np.exp(t * cw)) @ cV.T @ R
        assert_allclose(Nt.mean, N0.mean, atol=1e-12)
        assert_allclose(Nt.cov, ref, rtol=1e-8, atol=1e-12)


def test_calvo_oller_matches_eriksen_at_standard():
    rng = np.random.default_rng(8)
    for _ in range(30):
        d = int(rng.integers(1, 5))
        v = random_tangent(rng, d)
        for t in (0.3, 0.7, 1.0):
            E = fr_geodesic_ivp_eriksen(v, t)
            C = fr_geodesic_ivp_calvo_oller(MVN.standard(d), v, t)
            assert mvn_err(C, E) <= 1e-8


def test_calvo_oller_equivariance_from_general_start():
    rng = np.random.default_rng(9)
    for _ in range(20):
        d = int(rng.integers(1, 4))
        N0 = random_mvn(rng, d)
        v = random_tangent(rng, d, 0.7)
        N1 = fr_geodesic_ivp_calvo_oller(N0, v, 1.0)
        # shooting back recovers the length and the tangent
        g = fr_geodesic(N0, N1)
        assert g.length == pytest.approx(fisher_norm(N0, v), rel=1e-8)
        assert_allclose(g.tangent.dmean, v.dmean, atol=1e-7)
        assert_allclose(g.tangent.dcov, v.dcov, atol=1e-7)


def test_calvo_oller_natural_coordinates():
    rng = np.random.default_rng(10)
    N0 = random_mvn(rng, 2)
    v = random_tangent(rng, 2)
    a = fr_geodesic_ivp_calvo_oller(N0, v, 0.6)
    b = fr_geodesic_ivp_calvo_oller(N0, TangentVector(*natural_tangent(N0, v)), 0.6, coords="natural")
    assert mvn_err(a, b) <= 1e-10


# ---------------------------------------------------------------------------
# boundary-value geodesics

def test_bvp_endpoints_and_examples():
    N0, N1 = SWAP_PAIR
    g = fr_geodesic(N0, N1)
    assert g(0) is N0 and g(1) is N1
    assert mvn_err(g(1 - 1e-12), N1) <= 1e-8
    assert mvn_err(g(1e-12), N0) <= 1e-8
    assert g.length == pytest.approx(SWAP_PAIR_LENGTH, rel=1e-9)
    with pytest.raises(InvalidInput):
        fr_geodesic(N0, N1, method="spline")


def test_bvp_same_mean_is_spd_geodesic():
    rng = np.random.default_rng(11)
    for method in ("exact", "cone"):
        N0 = MVN([0.0, 0.0], random_mvn(rng, 2).cov)
        N1 = MVN([0.0, 0.0], random_mvn(rng, 2).cov)
        for t in (0.25, 0.5, 0.75):
            Nt = fr_geodesic_bvp(N0, N1, t, method)
            assert_allclose(Nt.mean, 0, atol=1e-10)
            assert_allclose(Nt.cov, spd_geodesic(N0.cov, N1.cov, t), rtol=1e-9, atol=1e-12)


def test_bvp_constant_speed():
    rng = np.random.default_rng(12)
    for _ in range(10):
        d = int(rng.integers(2, 4))
        N0, N1 = random_mvn(rng, d), random_mvn(rng, d)
        g = fr_geodesic(N0, N1)
        for s, t in [(0.0, 0.25), (0.25, 0.75), (0.5, 1.0)]:
            assert fr_distance(g(s), g(t)) == pytest.approx(abs(t - s) * g.length, rel=1e-8)


def test_bvp_matches_univariate_closed_form():
    rng = np.random.default_rng(13)
    for _ in range(20):
        N0, N1 = random_mvn(rng, 1), random_mvn(rng, 1)
        assert fr_geodesic(N0, N1).length == pytest.approx(fr_distance_univariate(N0, N1), rel=1e-9)


def test_bvp_equivariance():
    rng = np.random.default_rng(14)
    for _ in range(10):
        d = int(rng.integers(1, 4))
        N0, N1, m = random_mvn(rng, d), random_mvn(rng, d), random_affine(rng, d)
        for t in (0.25, 0.5, 0.75):
            lhs = fr_geodesic_bvp(affine_apply(m, N0), affine_apply(m, N1), t)
            rhs = affine_apply(m, fr_geodesic_bvp(N0, N1, t))
            assert mvn_err(lhs, rhs) <= 1e-8


def test_bvp_minimizes_against_other_curves():
    # the geodesic is shorter than the mixture, exponential and cone curves
    N0, N1 = SWAP_PAIR
    exact = fr_length_approx(N0, N1, 400)
    cone = fr_length_approx(N0, N1, 400, method="cone")
    assert exact < cone
    assert exact == pytest.approx(SWAP_PAIR_LENGTH, rel=1e-4)


# ---------------------------------------------------------------------------
# bounds and approximations

def test_length_approx_examples():
    N0, N1 = SWAP_PAIR
    assert fr_length_approx(N0, N1, 1) == pytest.approx(math.sqrt(jeffreys(N0, N1)), rel=1e-15)
    assert fr_length_approx(N0, N0, 7) == 0.0
    assert abs(fr_length_approx(N0, N1, 100, method="cone") - 3.1996) <= 5e-4
    with pytest.raises(InvalidInput):
        fr_length_approx(N0, N1, 0)


def test_length_approx_kl_step():
    N0, N1 = SWAP_PAIR
    a = fr_length_approx(N0, N1, 200, divergence="kl")
    assert a == pytest.approx(SWAP_PAIR_LENGTH, rel=1e-3)


def test_length_approx_monotone_and_above_lower_bound():
    N0, N1 = SWAP_PAIR
    lb = calvo_oller_lower_bound(N0, N1)
    vals = [fr_length_approx(N0, N1, T) for T in (1, 2, 4, 8, 16, 32, 64, 128)]
    assert np.all(np.diff(vals) <= 1e-9)
    assert min(vals) >= lb - 1e-9


def test_lower_bound_examples():
    N = MVN([1.0, 0.0], np.eye(2))
    assert calvo_oller_lower_bound(N, N) == pytest.approx(0, abs=1e-7)
    rng = np.random.default_rng(15)
    N0 = MVN([0.0, 0.0], random_mvn(rng, 2).cov)
    N1 = MVN([0.0, 0.0], random_mvn(rng, 2).cov)
    assert calvo_oller_lower_bound(N0, N1) == pytest.approx(fr_distance_same_mean(N0, N1), rel=1e-12)
    lb = calvo_oller_lower_bound(*SWAP_PAIR)
    assert 0 < lb <= SWAP_PAIR_LENGTH
    ref = spd_trace_distance(embed(SWAP_PAIR[0]), embed(SWAP_PAIR[1]), 1 / math.sqrt(2))
    assert lb == pytest.approx(ref, rel=1e-14)


def test_approx_examples():
    N = MVN([0.0, 0.0], np.eye(2))
    r = fr_distance_approx(N, N, 1e-3)
    assert r.value == 0 and r.segments == 1
    r = fr_distance_approx(*SWAP_PAIR, 1e-4)
    assert 3.13 <= r.value <= 3.14
    assert r.lower <= SWAP_PAIR_LENGTH <= r.upper <= (1 + 1e-4) * r.lower
    r = fr_distance_approx(MVN(0.0, 1.0), MVN(1.0, 1.0), 1e-5)
    assert abs(r.value - math.sqrt(2) * math.log(2)) <= 1e-4
    with pytest.raises(InvalidInput):
        fr_distance_approx(N, N, 0.0)


def test_approx_depth_limit():
    N0, N1 = SWAP_PAIR
    with pytest.raises(NumericalFailure):
        fr_distance_approx(N0, N1, 1e-6, max_depth=2)


def test_approx_deterministic():
    rng = np.random.default_rng(16)
    N0, N1 = random_mvn(rng, 3), random_mvn(rng, 3)
    assert fr_distance_approx(N0, N1, 1e-3) == fr_distance_approx(N0, N1, 1e-3)


def test_approx_brackets_exact_distance():
    rng = np.random.default_rng(17)
    for _ in range(30):
        d = int(rng.integers(1, 4))
        N0, N1 = random_mvn(rng, d), random_mvn(rng, d)
        r = fr_distance_approx(N0, N1, 1e-3)
        rho = fr_distance(N0, N1)
        assert r.lower <= rho * (1 + 1e-9)
        assert rho <= r.upper * (1 + 1e-9)
        assert r.upper <= (1 + 1e-3) * r.lower * (1 + 1e-12)


def test_approx_ahm_midpoint():
    N0, N1 = SWAP_PAIR
    r = fr_distance_approx(N0, N1, 1e-3, midpoint="ahm")
    # a broken path through approximate midpoints is still an upper bound
    assert SWAP_PAIR_LENGTH <= r.upper <= SWAP_PAIR_LENGTH * 1.01


def test_arc_length_parameterization():
    N0, N1 = SWAP_PAIR
    g = fr_geodesic(N0, N1)
    full = fr_distance_approx(N0, N1, 1e-3).value
    for s, t in [(0.0, 0.25), (0.25, 0.75), (0.5, 1.0), (0.0, 1.0)]:
        part = fr_distance_approx(g(s), g(t), 1e-3).value
        assert part == pytest.approx(abs(t - s) * full, rel=5e-3)


def test_same_mean_approx():
    rng = np.random.default_rng(18)
    N0 = random_mvn(rng, 2)
    N1 = MVN(N0.mean, random_mvn(rng, 2).cov)
    g = fr_geodesic(N0, N1)
    for t in (0.3, 0.6):
        assert_allclose(g(t).mean, N0.mean, atol=1e-10)
    r = fr_distance_approx(N0, N1, 1e-3)
    assert r.value == pytest.approx(fr_distance_same_mean(N0, N1), rel=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_sandwich_property(d, seed):
    rng = np.random.default_rng(seed)
    N0, N1 = random_mvn(rng, d), random_mvn(rng, d)
    lb = calvo_oller_lower_bound(N0, N1)
    r = fr_distance_approx(N0, N1, 1e-2)
    rho = fr_distance(N0, N1)
    assert lb <= rho + 1e-9
    assert lb <= r.upper + 1e-9
    assert r.upper <= math.sqrt(jeffreys(N0, N1)) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_distance_symmetric(d, seed):
    rng = np.random.default_rng(seed)
    N0, N1 = random_mvn(rng, d), random_mvn(rng, d)
    assert fr_distance(N0, N1) == pytest.approx(fr_distance(N1, N0), rel=1e-9)
