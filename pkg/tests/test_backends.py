"""The compiled kernels and their pure-Python mirror must agree bit for bit."""
import math

import numpy as np
import pytest

from mrsle import _pykernels as P

C = pytest.importorskip("mrsle._ckernels")


def bg(s):
    return np.random.Philox(np.random.SeedSequence([s, 0]))


def run_all(M):
    out = {}
    xi = np.empty(201)
    v = np.empty((2, 201))
    x = np.empty(201)
    st = M.rho_path(bg(1), 3.0, 0.5, np.array([2.0, 2.0]), 0.0, np.array([0.3, 2.0]), 1e-3, 200, 1, 3.0, 0.3,
                    10.0, 1e-9, xi, v, x)
    out["rho"] = (st, xi, v, x)
    o, e = np.empty(301), np.empty(2)
    out["bessel"] = (M.bessel_path(bg(2), 2.0, 2.0, 0.0, 0.2, 1e-3, 300, 10.0, 1e-9, o, e), o, e)
    o = np.empty(5)
    out["slice"] = (M.slice_path(bg(3), 3.0, 0.0, np.array([0.5, 3.0]), 1e-3, 300, 10.0, 1e-9, o), o)
    o = np.empty((201, 3))
    out["multi"] = (M.multiradial_path(bg(4), 2.0, 1.0, np.array([0.0, 0.2, 3.0]), 1e-3, 200, 10.0, 1e-9, o), o)
    drv = np.cumsum(np.r_[0.0, math.sqrt(4e-3) * np.random.default_rng(0).standard_normal(400)])
    o = np.empty((500, 2))
    n = M.zipper_tips(drv, 2e-3, 1, 0.0, o)
    out["zipper"] = (n, o[:n])
    jets = np.array([[1.0, 1, 0, 0], [2.5, 1, 0, 0]])
    d = np.c_[np.linspace(0, 0.3, 11), np.linspace(4, 4.2, 11)]
    out["jets"] = (M.jet_flow(jets, d, np.ones((11, 2)), 0.01, 4, 1e-9), jets)
    none = np.zeros(0, dtype=np.int_)
    for mode, seed, args in (
        (0, 5, (3.0, 0.0, np.array([1, 2, 1, 2]), np.array([20, 20, 20, 20]), 1e-3, 0.0, 0.0)),
        (1, 6, (4.0, 2.0, none, none, 0.0, 2e-3, 0.1)),
        (2, 7, (4.0, 2.0, none, none, 0.0, 2e-3, 0.1)),
    ):
        s, h = np.zeros(18), np.zeros((300, 4))
        k, mu, cur, stp, delta, dt, t_own = args
        st = M.lattice_path(bg(seed), k, mu, 0.0, math.pi, mode, cur, stp, delta, dt, t_own, 10.0, 1e-9,
                            300, 300, s, h)
        out[f"lattice{mode}"] = (st, s, h)
    return out


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


@pytest.fixture(scope="module")
def results():
    return run_all(C), run_all(P)


@pytest.mark.parametrize("kernel", ["rho", "bessel", "slice", "multi", "zipper", "jets",
                                    "lattice0", "lattice1", "lattice2"])
def test_bit_identical(results, kernel):
    c, p = results
    assert same(c[kernel], p[kernel])


def test_backend_selection_env(monkeypatch):
    import importlib

    import mrsle._backend as B

    monkeypatch.setenv("MRSLE_BACKEND", "python")
    try:
        importlib.reload(B)
        assert B.NAME == "python" and B.kernels is P
    finally:
        monkeypatch.delenv("MRSLE_BACKEND")
        importlib.reload(B)
    assert B.NAME == "cython"
