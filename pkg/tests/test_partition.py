import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import hyp2f1

from mrsle import partition as P
from mrsle.errors import DomainError, PoleError

kappas = st.floats(0.5, 7.9)


def spaced_angles(p, min_half_sine=0.05):
    def ok(a):
        a = np.sort(np.asarray(a))
        gaps = np.diff(np.r_[a, a[0] + 2 * math.pi])
        return np.min(np.abs(np.sin(gaps / 2))) > min_half_sine

    return st.lists(st.floats(0, 2 * math.pi), min_size=p, max_size=p).map(sorted).filter(ok)


# frozen values computed by hand from the closed forms
def test_exponents_kappa_4():
    e = P.exponents(4.0)
    assert (e.b, e.b_tilde, e.c, e.e0) == (0.25, 0.125, 1.0, 0.0)
    assert e.h(1) == pytest.approx(0.25)
    assert e.h(2) == pytest.approx(1.0)


def test_exponents_kappa_6_is_c_zero():
    e = P.exponents(6.0)
    assert e.b == 0.0 and e.c == 0.0 and e.b_tilde == 0.0


def test_exponents_reject_nonpositive():
    with pytest.raises(DomainError):
        P.exponents(-1.0)


@given(kappas)
def test_central_charge_identity(k):
    e = P.exponents(k)
    assert e.c == pytest.approx(1 - 24 * e.e0**2, abs=1e-12)


def test_multiradial_frozen_values():
    # two antipodal points: (2/k) log 2
    assert P.z_multiradial(4.0, 0.0, [0, math.pi]).log_abs == pytest.approx(0.5 * math.log(2), abs=1e-14)
    # three equally spaced points at kappa = 2: 3 log(2 sin(pi/3)) = 1.5 log 3
    v = P.z_multiradial(2.0, 0.0, [0, 2 * math.pi / 3, 4 * math.pi / 3])
    assert v.log_abs == pytest.approx(1.5 * math.log(3), abs=1e-13)
    np.testing.assert_allclose(v.grad, 0.0, atol=1e-14)


@settings(max_examples=50)
@given(kappas, st.floats(-3, 3), spaced_angles(3), st.floats(-10, 10))
def test_rotation_covariance(k, mu, angles, s):
    a = P.z_multiradial(k, mu, angles)
    b = P.z_multiradial(k, mu, np.asarray(angles) + s)
    # the spiral factor picks up exp(p mu s / k)
    assert b.log_abs - a.log_abs == pytest.approx(3 * mu * s / k, abs=1e-9)
    np.testing.assert_allclose(a.grad, b.grad, atol=1e-8)


@settings(max_examples=50)
@given(kappas, st.floats(-3, 3), spaced_angles(4))
def test_rho_two_is_multiradial(k, mu, angles):
    a = P.z_multiradial(k, mu, angles)
    b = P.z_radial_rho(k, mu, [2.0, 2.0, 2.0], angles)
    assert a.log_abs == pytest.approx(b.log_abs, abs=1e-12)
    np.testing.assert_allclose(a.grad, b.grad, atol=1e-10)


@settings(max_examples=30)
@given(kappas, st.floats(-2, 2), spaced_angles(3, 0.1), st.lists(st.floats(0, 4), min_size=2, max_size=2))
def test_rho_gradient_matches_finite_difference(k, mu, angles, rho):
    th = np.asarray(angles)
    g = P.z_radial_rho(k, mu, rho, th).grad
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (P.z_radial_rho(k, mu, rho, th + e).log_abs - P.z_radial_rho(k, mu, rho, th - e).log_abs) / (2 * h)
        assert g[j] == pytest.approx(fd, abs=1e-5)


def test_interior_point_at_origin_reduces():
    th = [0.3, 2.0, 4.4]
    a = P.z_multiradial_at(8 / 3, th, 0j)
    b = P.z_multiradial(8 / 3, 0.0, th)
    assert a.log_abs == pytest.approx(b.log_abs, abs=1e-13)
    np.testing.assert_allclose(a.grad, b.grad, atol=1e-12)


@pytest.mark.parametrize("k", [2.0, 8 / 3, 4.0])
@pytest.mark.parametrize("p,mu", [(2, 0.0), (2, 1.0), (3, 0.0), (3, 1.0)])
def test_radial_bpz(k, p, mu):
    th = np.array([0.0, 2.2, 4.0][:p])
    for j in range(p):
        r = P.bpz_residual(lambda t: P.z_multiradial(k, mu, t), th, j, (mu * mu - (p * p - 1)) / (2 * k), k)
        assert abs(r) < 1e-6


@pytest.mark.parametrize("k", [2.0, 8 / 3, 4.0])
@pytest.mark.parametrize("n", [1, 2])
def test_fusion_bpz(k, n):
    e = P.exponents(k)
    th = np.array([0.0, 1.9, 4.1][: n + 1])
    w = [e.b] * n + [e.h(n)]
    for j in range(n):
        r = P.bpz_residual(lambda t: P.z_fusion(k, t[:n], t[n]), th, j, e.b_tilde, k, weights=w)
        assert abs(r) < 1e-6


@settings(max_examples=30)
@given(st.floats(1.0, 7.5), spaced_angles(3, 0.1))
def test_fusion_two_routes_agree(k, angles):
    # disc formula versus transport from the half-plane product form
    th = np.asarray(angles)
    direct = P.z_fusion(k, th[:2], th[2]).log_abs
    via_h = P.z_fusion_from_h(k, th[:2], th[2])
    assert direct == pytest.approx(via_h, abs=1e-9)


def test_fusion_constants():
    assert P.fusion_constant(1, 5.0) == pytest.approx(1.0, abs=1e-10)
    for k in (5.0, 6.0, 7.0):
        ref = 1 / hyp2f1(4 / k, 1 - 4 / k, 8 / k, 1.0)
        assert P.fusion_constant(2, k) == pytest.approx(ref, rel=1e-8)
        assert P.fusion_constant_gauss(k) == pytest.approx(ref, rel=1e-12)


def test_q_integers():
    assert P.q_integer(1, 5.0) == 1.0
    # [2]_q = 2 cos(4 pi / k)
    assert P.q_integer(2, 5.0) == pytest.approx(2 * math.cos(4 * math.pi / 5), abs=1e-14)
    with pytest.raises(PoleError):
        P.q_integer(2, 4.0)


def _rainbow_oracle(k, x1, x2, y2, y1):
    # two-curve rainbow from its hypergeometric form, normalized like the quadrature
    b = (6 - k) / (2 * k)
    w = (x2 - x1) * (y1 - y2) / ((y2 - x1) * (y1 - x2))
    F = lambda z: hyp2f1(4 / k, 1 - 4 / k, 8 / k, z)
    return ((y1 - x1) * (y2 - x2)) ** (-2 * b) * w ** (2 / k) * F(w) / F(1)


def test_rainbow_single_curve():
    assert P.rainbow_numeric(1, 5.0, [0.0], [1.0]).value == pytest.approx(1.0, rel=1e-6)
    b = P.exponents(5.0).b
    assert P.rainbow_numeric(1, 5.0, [-1.0], [2.0]).value == pytest.approx(3.0 ** (-2 * b), rel=1e-6)


def test_rainbow_two_curves_against_hypergeometric():
    v = P.rainbow_numeric(2, 5.0, [0.0, 0.4], [2.0, 1.3]).value
    assert v == pytest.approx(_rainbow_oracle(5.0, 0.0, 0.4, 1.3, 2.0), rel=1e-8)


def test_rainbow_rejects_bad_order():
    with pytest.raises(DomainError):
        P.rainbow_numeric(2, 5.0, [0.0, 0.4], [1.3, 2.0])
    with pytest.raises(DomainError):
        P.rainbow_numeric(1, 3.0, [0.0], [1.0])


def test_coincident_points_rejected():
    with pytest.raises(DomainError):
        P.z_multiradial(3.0, 0.0, [1.0, 1.0])
