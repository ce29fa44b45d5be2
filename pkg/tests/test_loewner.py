import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrsle import loewner as L
from mrsle.conformal import SlitHull, slit_hull_map
from mrsle.errors import DomainError, NumericError, StencilError
from mrsle.samplers import path_bitgen


def tip_radius(t):
    # solve (1 + r)^2 / (4 r) = e^t for r in (0, 1)
    c = math.exp(t)
    return 2 * c - 1 - 2 * math.sqrt(c * c - c)


def test_angle_config_validation():
    assert L.AngleConfig((0, 1, 2)).p == 3
    with pytest.raises(DomainError):
        L.AngleConfig((1.0, 0.5))
    with pytest.raises(DomainError):
        L.AngleConfig((0.0, 2 * math.pi))


def test_velocity_single_driver():
    assert L.velocity(math.pi, [0.0], [1.0])[0] == pytest.approx(0.0, abs=1e-15)
    assert L.velocity(math.pi / 2, [0.0], [2.0])[0] == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.6, 2 * math.pi - 0.6))
def test_frozen_flow_matches_slit_map(t, theta):
    # ODE route versus the closed-form slit uniformizer
    jet = L.flow_covering(L.DerivativeJet(theta), 0.0, t, substeps=64)
    m = slit_hull_map(SlitHull(0.0, 1 - tip_radius(t)))
    img = float(m.boundary_image(theta))
    assert math.remainder(jet.h - img, 2 * math.pi) == pytest.approx(0.0, abs=1e-7)
    assert jet.h1 == pytest.approx(abs(m.deriv(np.exp(1j * theta))), rel=1e-6)


def test_trace_constant_driving_is_radial_slit():
    t, z = L.trace_single(np.zeros(201), 1e-3)
    assert t[-1] == pytest.approx(0.2)
    assert abs(z[-1].imag) < 1e-12
    assert z[-1].real == pytest.approx(tip_radius(0.2), rel=1e-9)


def test_trace_stops_at_radius():
    t, z = L.trace_single(np.zeros(20001), 1e-3, stride=10, stop_radius=0.5)
    assert abs(z[-1]) <= 0.5 + 1e-12
    assert len(z) < 2001


def test_common_to_multi_time():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(L.common_to_multi_time(t, np.ones(11))[:, 0], t)
    # h1 = 1/2 quadruples the own rate
    np.testing.assert_allclose(L.common_to_multi_time(t, np.full(11, 0.5))[-1, 0], 4.0)
    with pytest.raises(NumericError):
        L.common_to_multi_time(t, np.full(11, 1.5))


def test_schwarzian_n_identity():
    assert L.schwarzian_n(L.DerivativeJet(0.3)) == 0.0


def test_stencil_jet_matches_direct_flow():
    st_ = L.new_state([0.0, 2.0], grid=8)
    for _ in range(100):
        st_ = L.multislit_step(st_, [0.0, 0.0], 1e-3, rates=[1.0, 0.0])
    est = L.tip_jet_estimate(st_, 1)
    ref = L.flow_covering(L.DerivativeJet(2.0), 0.0, 0.1, substeps=400)
    assert est.h == pytest.approx(ref.h, abs=1e-10)
    assert est.h1 == pytest.approx(ref.h1, rel=1e-5)
    assert est.h2 == pytest.approx(ref.h2, rel=1e-3, abs=1e-6)
    assert st_.log_cap == pytest.approx(0.1)
    with pytest.raises(StencilError):
        L.tip_jet_estimate(st_, 0)


def test_state_json_roundtrip(tmp_path):
    st_ = L.multislit_step(L.new_state([0.0, 2.0, 4.0], spectators=[1.0], grid=4), [0.01, 0.0, -0.01], 1e-3)
    st_.to_json(tmp_path / "s.json")
    back = L.MultiSlitState.from_json(tmp_path / "s.json")
    np.testing.assert_array_equal(back.spectator_jets, st_.spectator_jets)
    assert back.common_time == st_.common_time
    assert back.jet_of(1.0).h == st_.jet_of(1.0).h


def test_accumulate_m_rejects_bad_jet():
    st_ = L.new_state([0.0, 2.0])
    assert L.accumulate_m(st_, [L.DerivativeJet(0.0)], [0.1]) == 0.0
    with pytest.raises(NumericError):
        L.accumulate_m(st_, [L.DerivativeJet(0.0, 1.5)], [0.1])


def test_lattice_staircase_capacities():
    summ, _ = L.run_lattice(path_bitgen(3), 3.0, 0.0, (0.0, math.pi), mode=0,
                            schedule=((1, 0.05), (2, 0.05), (1, 0.05)), delta=1e-3)
    assert summ.status == 0
    assert summ.t1 == pytest.approx(0.1)
    assert summ.t2 == pytest.approx(0.05)
    assert 0 < summ.jet1.h1 <= 1 and 0 < summ.jet2.h1 <= 1


@pytest.mark.parametrize("mode", [1, 2])
def test_lattice_multiradial_reaches_own_time(mode):
    summ, hist = L.run_lattice(path_bitgen(4), 3.0, 0.5, (0.0, math.pi), mode=mode, dt=2e-3, t_own=0.1, history=50)
    assert summ.status == 0
    assert summ.t1 == pytest.approx(0.1, abs=1e-12)
    assert hist.shape[1] == 4


def test_lattice_bad_mode():
    with pytest.raises(DomainError):
        L.run_lattice(path_bitgen(0), 3.0, 0.0, (0.0, 1.0), mode=5)
