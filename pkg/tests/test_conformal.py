import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mrsle.conformal import (
    SlitHull,
    boundary_poisson,
    conformal_radius_disc,
    mobius_to_origin,
    poisson_kernel_interior,
    slit_hull_map,
    wrap_angle,
)
from mrsle.errors import DomainError

disc = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0, 0.95), st.floats(0, 2 * math.pi))


def test_wrap_angle():
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == math.pi
    np.testing.assert_allclose(wrap_angle([0.5, 2 * math.pi + 0.5]), [0.5, 0.5])


def test_poisson_kernel_normalization():
    z = 0.3 + 0.4j
    total, _ = quad(lambda t: poisson_kernel_interior(t, z), 0, 2 * math.pi)
    assert total == pytest.approx(2 * math.pi, rel=1e-10)
    assert poisson_kernel_interior(1.0, 0j) == 1.0


def test_boundary_poisson():
    assert boundary_poisson(0.0, math.pi) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        boundary_poisson(1.0, 1.0)


def test_radius_outside_disc_rejected():
    with pytest.raises(DomainError):
        conformal_radius_disc(1.0 + 0j)


@given(disc, disc)
def test_mobius_automorphism(z0, w):
    phi = mobius_to_origin(z0)
    assert abs(phi(z0)) < 1e-12
    assert abs(phi(w)) < 1
    assert phi.inverse(phi(w)) == pytest.approx(w, abs=1e-9)
    # conformal radius is covariant: rad(phi(w)) = |phi'(w)| rad(w)
    assert conformal_radius_disc(phi(w)) == pytest.approx(abs(phi.deriv(w)) * conformal_radius_disc(w), rel=1e-9)


@given(disc, st.floats(0, 2 * math.pi))
def test_mobius_boundary_lift(z0, t):
    phi = mobius_to_origin(z0)
    a = phi.angle(t)
    assert cmath.exp(1j * a) == pytest.approx(phi(cmath.exp(1j * t)), abs=1e-9)
    h = 1e-6
    fd = (phi.angle(t + h) - phi.angle(t - h)) / (2 * h)
    assert phi.angle_deriv(t) == pytest.approx(fd, rel=1e-6)


def test_slit_map_frozen_capacity():
    # tip radius 1/2: g'(0) = (3/2)^2 / 2 = 9/8
    m = slit_hull_map(SlitHull(anchor=0.0, depth=0.5))
    assert m.derivative_at_origin() == 1.125
    h = 1e-6
    assert ((m(h) - m(-h)) / (2 * h)).real == pytest.approx(1.125, rel=1e-8)


@given(st.floats(0.05, 0.9), st.floats(0, 2 * math.pi), disc)
def test_slit_map_into_disc(depth, anchor, z):
    m = slit_hull_map(SlitHull(anchor, depth))
    assert abs(m(0j)) == 0
    assert abs(m(z)) < 1 + 1e-12
    # the boundary arc away from the slit base stays on the circle
    t = anchor + 1.0
    assert abs(m(cmath.exp(1j * t))) == pytest.approx(1.0, abs=1e-9)


def test_slit_map_derivative_and_radius():
    m = slit_hull_map(SlitHull(0.7, 0.4))
    z = -0.2 + 0.3j
    h = 1e-6
    fd = (m(z + h) - m(z - h)) / (2 * h)
    assert m.deriv(z) == pytest.approx(fd, rel=1e-7)
    # the slit shrinks the conformal radius
    assert m.conformal_radius(z) < conformal_radius_disc(z)
    assert m.conformal_radius(0j) == pytest.approx(1 / m.cap)


def test_slit_depth_validated():
    with pytest.raises(DomainError):
        SlitHull(0.0, 1.0)
