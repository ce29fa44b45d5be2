"""Small-sample runs of every check; the full-size versions live in test_acceptance."""
import math

import numpy as np
import pytest

from mrsle import verify as V
from mrsle.errors import DomainError
from mrsle.samplers import BesselParams


def test_side_seeds_differ():
    assert V.side_seed(1, 0) != V.side_seed(1, 1)
    assert V.side_seed(1, 0) == V.side_seed(1, 0)


def test_mc_deterministic_sample_needs_exact_match():
    assert V._mc("x", [2.0] * 5, 2.0, 3.0, None, {}).passed
    r = V._mc("x", [2.0] * 5, 2.0 + 1e-9, 3.0, None, {})
    assert not r.passed and math.isinf(r.z_score)


def test_spiral_zero_mu_is_exact():
    r = V.check_spiral_martingale(3.0, 0.0, 0.7, 1.0, 50, seed=1, dt=1e-3)
    assert r.passed and r.std_error == 0.0 and r.estimate == 1.0


def test_spiral_martingale_small():
    r = V.check_spiral_martingale(2.0, 1.0, 0.0, 1.0, 400, seed=2, dt=1e-3)
    assert r.passed
    d = r.to_dict()
    assert d["pass"] is True and "passed" not in d


def test_slice_martingale_small():
    r = V.check_slice_martingale(3.0, 0.0, 2, [0.0, math.pi], 0.2, 300, seed=3, dt=1e-3)
    assert abs(r.z_score) < 4


def test_two_time_small():
    r = V.check_two_time_martingale(8 / 3, 0.0, [0.0, math.pi], schedule=((1, 0.05), (2, 0.05)), n_paths=100,
                                    seed=4, tolerance=4.0)
    assert r.n_paths == 100 and abs(r.z_score) < 4


def test_resampling_single_curve():
    r = V.check_resampling_marginal(3.0, 0.5, 1, [0.0], 0.3, 300, seed=5)
    assert r.functionals == ["terminal", "running_max"]
    assert r.passed


def test_resampling_rejects_large_p():
    with pytest.raises(DomainError):
        V.check_resampling_marginal(3.0, 0.0, 3, [0, 2, 4], 0.3, 10, seed=0)


def test_transience_small():
    r = V.check_transience(2.0, 0.0, [], [0.0], horizon_n=3, n_paths=20, seed=6)
    assert r.n_violations == 0 and r.extra["fraction_reached"] == 1.0


def test_transience_rejects_negative_rho():
    with pytest.raises(DomainError, match="rho"):
        V.check_transience(2.0, 0.0, [-1.0], [0.0, 2.0], n_paths=2)


def test_gap_and_coupling_small():
    assert V.check_gap_decay(2.0, 0.5, [2.0, 2.0], [0.0, 2.0, 3.0], T=0.5, n_paths=20, seed=7).passed
    assert V.check_coupling(2.0, 0.5, [2.0, 2.0], [0.0, 2.0, 3.0], T=0.5, n_paths=20, seed=7).passed


def test_common_time_inequality_small():
    r = V.check_common_time_inequality(3.0, 0.0, [0.0, math.pi], T=0.1, n_paths=20, seed=8)
    assert r.passed


def test_hitting_exponent_empty_cell_reported():
    bp = BesselParams(alpha=2.0, kappa=2.0, x0=0.2)
    r = V.fit_hitting_exponent(bp, [0.001, 0.002, 0.01], 0.05, 20, seed=0)
    assert not r.passed and "empty" in r.note


def test_hitting_exponent_small():
    bp = BesselParams(alpha=1.0, kappa=2.0, x0=0.2)
    r = V.fit_hitting_exponent(bp, [0.4, 0.2, 0.1], 2.0, 3000, seed=9)
    assert r.target == 1.0
    assert r.slope == pytest.approx(1.0, rel=0.3)


def test_fusion_limit_single_curve():
    r = V.check_fusion_limit(1, 5.0)
    dev = r.params["deviations"]
    assert r.passed and dev[-1] < 0.02
    assert np.all(np.diff(dev) < 0)


def test_mc_rejects_single_path_domination():
    vals = [1e-3] * 999 + [1000.0]
    r = V._mc("x", vals, 1.0, 3.0, None, {})
    assert abs(r.z_score) <= 3 and r.max_share > 0.9
    assert not r.passed
