import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrsle import samplers as S
from mrsle.errors import DomainError
from mrsle.loewner import velocity
from mrsle.partition import z_multiradial, z_radial_rho


def test_params_validation():
    with pytest.raises(DomainError):
        S.SleParams(8.5)
    with pytest.raises(DomainError):
        S.SleParams(3.0, rho=(2.0,), p=3)
    with pytest.raises(DomainError):
        S.BesselParams(alpha=1.0, kappa=5.0)


def test_paths_are_reproducible_and_independent():
    p = S.SleParams(3.0, 0.5)
    a = S.sample_radial_sle(p, 1e-3, 100, seed=11, path=4)
    b = S.sample_radial_sle(p, 1e-3, 100, seed=11, path=4)
    c = S.sample_radial_sle(p, 1e-3, 100, seed=11, path=5)
    np.testing.assert_array_equal(a.xi, b.xi)
    assert not np.array_equal(a.xi, c.xi)


def test_radial_increments_moments():
    r = S.sample_radial_sle(S.SleParams(4.0, 1.0), 1e-2, 20000, seed=1)
    inc = np.diff(r.xi)
    assert inc.mean() == pytest.approx(1e-2, abs=4 * math.sqrt(4e-2 / 20000))
    assert inc.var() == pytest.approx(4e-2, rel=0.05)


@settings(max_examples=40)
@given(st.floats(0.5, 7.5), st.floats(-2, 2), st.floats(0.3, 2.5), st.floats(3.5, 5.8),
       st.lists(st.floats(0, 4), min_size=2, max_size=2))
def test_rho_drift_is_log_gradient(k, mu, v1, v2, rho):
    # drift = kappa d/dxi log Z_rho, two independent formulas
    g = z_radial_rho(k, mu, rho, [0.0, v1, v2]).grad[0]
    assert S.rho_drift(mu, rho, 0.0, [v1, v2]) == pytest.approx(k * g, abs=1e-9)


@settings(max_examples=40)
@given(st.floats(0.5, 7.5), st.floats(-2, 2), st.floats(0.3, 2.5), st.floats(3.5, 5.8))
def test_common_time_drift_decomposition(k, mu, w1, w2):
    # joint-chart drift = tilt kappa d log Z plus the Loewner push of the other curves
    w = np.array([0.0, w1, w2])
    grad = z_multiradial(k, mu, w).grad
    push = np.array([velocity(w[j], np.delete(w, j), np.ones(2))[0] for j in range(3)])
    np.testing.assert_allclose(S.multiradial_drift(mu, w), k * grad + push, atol=1e-9)


def test_driving_record_csv_roundtrip(tmp_path):
    r = S.sample_radial_sle_rho(S.SleParams(3.0, 0.2, (2.0, 1.0), 3), [0.0, 2.0, 4.0], 1e-3, 50, seed=2)
    r.to_csv(tmp_path / "r.csv")
    back = S.DrivingRecord.from_csv(tmp_path / "r.csv")
    np.testing.assert_array_equal(back.xi, r.xi)
    np.testing.assert_array_equal(back.force_points, r.force_points)
    assert back.params["rho"] == [2.0, 1.0]
    m = S.sample_multiradial_common(S.SleParams(3.0, 1.0, (), 3), [0.0, 2.094, 4.189], 1e-4, 50, seed=7)
    m.to_csv(tmp_path / "m.csv")
    head = (tmp_path / "m.csv").read_text().splitlines()[0]
    assert head == "step,time,omega1,omega2,omega3"
    np.testing.assert_array_equal(S.DrivingRecord.from_csv(tmp_path / "m.csv").omegas, m.omegas)


def test_bessel_extrema_cover_path():
    bp = S.BesselParams(alpha=2.0, kappa=4.0, x0=1.0)
    b = S.sample_bessel(bp, 1e-3, 2000, seed=3)
    assert b.status == 0
    assert b.xmin <= b.x.min() and b.xmax >= b.x.max()
    assert 0 < b.xmin and b.xmax < 2 * math.pi


def test_coupled_gap_dominance():
    gaps, x, st_ = S.sample_coupled_gap(S.SleParams(2.0, 0.5, (2.0, 2.0), 3), [0.0, 2.0, 3.0], 1e-3, 1000, seed=5)
    assert st_ == 0
    # started at the outer gap the Bessel process stays below it
    assert np.all(gaps[-1] >= x - 1e-9)


def test_slice_keeps_spectators_ordered():
    xi, h, lh, st_ = S.sample_slice(3.0, 0.0, [1.0, 4.0], 1e-3, 200, seed=9)
    assert st_ == 0
    assert xi < h[0] < h[1] < xi + 2 * math.pi
    assert np.all(lh < 0.5)
    with pytest.raises(DomainError):
        S.sample_slice(3.0, 0.0, [7.0], 1e-3, 10, seed=0)


def test_lattice_sampler_requires_two_curves():
    with pytest.raises(DomainError):
        S.sample_multiradial_lattice(S.SleParams(3.0, p=3), (0.0, 1.0), 1e-3, 0.1, seed=0)
    with pytest.raises(DomainError):
        S.sample_multiradial_lattice(S.SleParams(3.0, p=2), (0.0, 1.0), 1e-3, 0.1, seed=0, clock="wall")


def test_watermelon_driver_reports_status():
    r = S.sample_watermelon_driver(3.0, 2, [0.0, 2.0], 4.0, 1e-3, 100, seed=1)
    assert r.params["rho"] == [2.0, 3.0 - 4.0 - 4.0]
    assert r.force_points.shape == (2, 101)
