"""The acceptance suite as a composition of gated checks.

Each criterion function returns a CriterionResult whose ``checks`` list
holds one dict per gated quantity (name, value, tolerance, pass).  Presets
scale the Monte Carlo budgets: "desk" runs the stated budgets, "smoke" is a
seconds-long wiring check whose statistical verdicts are not meaningful.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .conformal import boundary_poisson, conformal_radius_disc, poisson_kernel_interior
from .partition import (
    bpz_residual,
    chordal_bpz_residual,
    exponents,
    fusion_constant,
    fusion_constant_gauss,
    rainbow_numeric,
    z_fusion,
    z_multiradial,
    z_multiradial_at,
    z_radial_rho,
)
from .samplers import BesselParams
from .verify import (
    check_common_time_inequality,
    check_coupling,
    check_fusion_limit,
    check_gap_decay,
    check_resampling_marginal,
    check_slice_martingale,
    check_spiral_martingale,
    check_transience,
    check_two_time_martingale,
    fit_hitting_exponent,
)

PRESETS = {
    "desk": 1.0,
    "smoke": 0.01,
}

BUDGETS = {1: 1, 2: 10, 3: 1, 4: 120, 5: 300, 6: 600, 7: 600, 8: 300, 9: 300, 10: 600}

TITLES = {
    1: "exact identities",
    2: "BPZ residuals",
    3: "fusion constants",
    4: "rainbow numerics",
    5: "fusion limit",
    6: "martingale Monte Carlo",
    7: "two-time martingale",
    8: "Bessel hitting exponent",
    9: "pathwise laws",
    10: "resampling marginal",
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget_seconds: float
    checks: list = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        failed = [c["name"] for c in self.checks if not c["pass"]]
        extra = f" failed: {', '.join(failed)}" if failed else ""
        if self.seconds > self.budget_seconds:
            extra += " (over time budget)"
        return (f"criterion {self.number:2d} ({self.title}): {verdict} "
                f"[{len(self.checks)} checks, {self.seconds:.1f}s / budget {self.budget_seconds}s]{extra}")

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name, value, tolerance, passed=None, **info) -> dict:
    ok = bool(value <= tolerance) if passed is None else bool(passed)
    return {"name": name, "value": float(value), "tolerance": tolerance, "pass": ok, **info}


def _report_check(name, report) -> dict:
    d = report.to_dict()
    value = d.get("z_score", d.get("slope", d.get("n_violations")))
    if "pvalues" in d:
        value = min(d["pvalues"]) if d["pvalues"] else float("nan")
    return {"name": name, "value": float(value), "tolerance": d.get("tolerance", d.get("threshold")),
            "pass": bool(d["pass"]), "report": d}


def _n(base: int, scale: float, floor: int = 20) -> int:
    return max(floor, int(round(base * scale)))


def _random_angles(rng, p, min_half_sine=0.1):
    if p == 1:
        return rng.uniform(0, 2 * math.pi, 1)
    while True:
        a = np.sort(rng.uniform(0, 2 * math.pi, p))
        gaps = np.diff(np.r_[a, a[0] + 2 * math.pi])
        if np.min(np.abs(np.sin(gaps / 2))) > min_half_sine:
            return a


# ---------------------------------------------------------------- deterministic criteria


def criterion_1(scale=1.0, seed=0, mapper=map) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        k = float(rng.uniform(0.5, 7.5))
        pts = _random_angles(rng, n + 1, 0.02)
        x, y = pts[:n], pts[n]
        z = complex(*rng.uniform(-0.6, 0.6, 2))
        E = exponents(k)
        hn = E.h(n)
        cr = conformal_radius_disc(z)
        lhs = (z_multiradial_at(k, x, z).log_abs - (hn - E.b_tilde - (n * n - 1) / (2 * k)) * math.log(cr)
               - z_fusion(k, x, y).log_abs)
        rhs = hn / n * sum(math.log(poisson_kernel_interior(t, z) / (cr * boundary_poisson(t, y))) for t in x)
        worst = max(worst, abs(math.expm1(lhs - rhs)))
    out = [_check("fusion ratio identity (100 configs, relative)", worst, 1e-10)]
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(2, 6))
        k = float(rng.uniform(0.5, 7.5))
        a = _random_angles(rng, p, 0.02)
        c = float(rng.uniform(-10, 10))
        worst = max(worst, abs(z_multiradial(k, 0.0, a + c).log_abs - z_multiradial(k, 0.0, a).log_abs))
    out.append(_check("rotation invariance of Z^0_p", worst, 1e-12))
    worst = 0.0
    for k in (1.0, 2.0, 8 / 3, 4.0, 6.0):
        E = exponents(k)
        worst = max(worst, abs(E.c - (1 - 24 * E.e0**2)))
    out.append(_check("c = 1 - 24 e0^2 at 5 kappas", worst, 1e-12))
    worst = 0.0
    for _ in range(50):
        p = int(rng.integers(1, 6))
        k = float(rng.uniform(0.5, 7.5))
        mu = float(rng.uniform(-2, 2))
        a = _random_angles(rng, p, 0.02)
        zr = z_radial_rho(k, mu, [2.0] * (p - 1), a)
        zm = z_multiradial(k, mu, a)
        worst = max(worst, abs(zr.log_abs - zm.log_abs), float(np.max(np.abs(zr.grad - zm.grad))))
    out.append(_check("z_radial_rho = z_multiradial at rho = 2", worst, 1e-12))
    return out


def criterion_2(scale=1.0, seed=0, mapper=map) -> list:
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for p in (2, 3):
        for k in (2.0, 8 / 3, 4.0):
            for mu in (0.0, 1.0):
                for _ in range(20):
                    a = _random_angles(rng, p)
                    tgt = (mu * mu - (p * p - 1)) / (2 * k)
                    for j in range(p):
                        r = bpz_residual(lambda th: z_multiradial(k, mu, th), a, j, tgt, k)
                        worst = max(worst, abs(r))
    out = [_check("radial BPZ for Z^mu_p", worst, 1e-6)]
    worst = 0.0
    for n in (1, 2, 3):
        for k in (2.0, 8 / 3, 4.0):
            E = exponents(k)
            w = [E.b] * n + [E.h(n)]
            for _ in range(20):
                a = _random_angles(rng, n + 1)
                for j in range(n):
                    r = bpz_residual(lambda th: z_fusion(k, th[:n], th[n]), a, j, E.b_tilde, k, weights=w)
                    worst = max(worst, abs(r))
    out.append(_check("radial BPZ for Z_fusion (target b~)", worst, 1e-6))
    return out


def criterion_3(scale=1.0, seed=0, mapper=map) -> list:
    a1 = max(abs(fusion_constant(1, k) - 1) for k in (4.5, 5.0, 6.0, 7.0, 7.5))
    a2 = max(abs(fusion_constant(2, k) / fusion_constant_gauss(k) - 1) for k in (5.0, 6.0, 7.0))
    return [_check("A_1 = 1", a1, 1e-10), _check("A_2 = Gauss formula at kappa 5, 6, 7 (relative)", a2, 1e-8)]


def criterion_4(scale=1.0, seed=0, mapper=map) -> list:
    k = 5.0
    b = exponents(k).b
    v = rainbow_numeric(1, k, [0.0], [1.0]).value
    out = [_check("n=1 rainbow at (0, 1) equals 1 (relative)", abs(v - 1), 1e-6)]
    lam = 2.5
    s1 = rainbow_numeric(1, k, [0.0], [lam]).value / lam ** (-2 * b) - 1
    r0 = rainbow_numeric(2, k, [0.0, 0.4], [2.0, 1.3]).value
    s2 = rainbow_numeric(2, k, [0.0, 0.4 * lam], [2.0 * lam, 1.3 * lam]).value / (lam ** (-4 * b) * r0) - 1
    out.append(_check("scaling covariance lambda^(-2 n b), n = 1, 2", max(abs(s1), abs(s2)), 1e-6))
    F = lambda u: rainbow_numeric(2, k, [u[0], u[1]], [u[3], u[2]]).value
    u = np.array([0.0, 1.0, 2.0, 3.5])
    res = max(abs(chordal_bpz_residual(F, u, j, k)) for j in range(4))
    out.append(_check("n=2 chordal BPZ finite-difference residual", res, 1e-3))
    return out


def criterion_5(scale=1.0, seed=0, mapper=map) -> list:
    out = []
    for n in (1, 2):
        r = check_fusion_limit(n, 5.0)
        out.append(_report_check(f"fusion limit n={n}", r))
    return out


# ---------------------------------------------------------------- Monte Carlo criteria


def criterion_6(scale=1.0, seed=0, mapper=map) -> list:
    N = _n(10_000, scale)
    out = [
        _report_check("spiral kappa=2 mu=1", check_spiral_martingale(2.0, 1.0, 0.0, 1.0, N, seed, mapper=mapper)),
        _report_check("spiral kappa=4 mu=-2 theta=pi",
                      check_spiral_martingale(4.0, -2.0, math.pi, 1.0, N, seed + 1, mapper=mapper)),
        _report_check("slice kappa=3 mu=0 p=2",
                      check_slice_martingale(3.0, 0.0, 2, (0.0, math.pi), 0.5, N, seed + 2, mapper=mapper)),
        _report_check("slice kappa=4 mu=1 p=3",
                      check_slice_martingale(4.0, 1.0, 3, (0.0, 2 * math.pi / 3, 4 * math.pi / 3), 0.5, N,
                                             seed + 3, mapper=mapper)),
    ]
    ex = check_spiral_martingale(3.0, 0.0, 0.7, 1.0, _n(1000, scale), seed + 4, mapper=mapper)
    out.append(_check("spiral mu=0 is exactly 1", abs(ex.estimate - 1), 1e-12,
                      passed=abs(ex.estimate - 1) <= 1e-12 and ex.std_error == 0.0))
    return out


def criterion_7(scale=1.0, seed=0, mapper=map) -> list:
    N = _n(4000, scale)
    th = (0.0, math.pi)
    return [
        _report_check("two-time kappa=8/3 (3 SE)",
                      check_two_time_martingale(8 / 3, 0.0, th, n_paths=N, seed=seed, tolerance=3.0, mapper=mapper)),
        _report_check("two-time kappa=3 (4 SE)",
                      check_two_time_martingale(3.0, 0.0, th, n_paths=N, seed=seed + 1, tolerance=4.0,
                                                mapper=mapper)),
    ]


def criterion_8(scale=1.0, seed=0, mapper=map) -> list:
    eps = (0.4, 0.2, 0.1)
    out = []
    for (a, k, n, tol) in ((2.0, 4.0, 20_000, 0.15), (1.0, 2.0, 20_000, 0.15), (2.0, 2.0, 50_000, 0.20)):
        r = fit_hitting_exponent(BesselParams(a, k, 0.0, 0.2), eps, 2.0, _n(n, scale, 200), seed,
                                 tolerance=tol, mapper=mapper)
        out.append(_report_check(f"Bessel slope alpha={a:g} kappa={k:g}", r))
    return out


def criterion_9(scale=1.0, seed=0, mapper=map) -> list:
    N = _n(500, scale)
    return [
        _report_check("tau_n capacity window", check_transience(2.0, 0.0, (), (0.0,), 5, N, seed, mapper=mapper)),
        _report_check("exponential gap decay",
                      check_gap_decay(2.0, 0.5, (2.0, 2.0), (0.0, 2.0, 3.0), 2.0, N, seed + 1, mapper=mapper)),
        _report_check("coupling dominance",
                      check_coupling(2.0, 0.5, (2.0, 2.0), (0.0, 2.0, 3.0), 2.0, N, seed + 2, mapper=mapper)),
        _report_check("common-time inequality",
                      check_common_time_inequality(3.0, 0.0, (0.0, math.pi), 0.5, N, seed + 3, mapper=mapper)),
    ]


def criterion_10(scale=1.0, seed=0, mapper=map) -> list:
    N = _n(2000, scale)
    th = (0.0, math.pi)
    return [
        _report_check("KS kappa=3 mu=0", check_resampling_marginal(3.0, 0.0, 2, th, 0.5, N, seed, mapper=mapper)),
        _report_check("KS kappa=4 mu=2", check_resampling_marginal(4.0, 2.0, 2, th, 0.5, N, seed + 1, mapper=mapper)),
    ]


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_criterion(number: int, preset: str = "desk", seed: int = 0, mapper=map) -> CriterionResult:
    scale = PRESETS[preset]
    t = time.perf_counter()
    checks = CRITERIA[number](scale, seed, mapper)
    dt = time.perf_counter() - t
    return CriterionResult(number, TITLES[number], all(c["pass"] for c in checks), dt, BUDGETS[number], checks)


def run_suite(preset: str = "desk", seed: int = 0, mapper=map, only=None, progress=None) -> list:
    out = []
    for k in sorted(CRITERIA) if only is None else only:
        r = run_criterion(k, preset, seed, mapper)
        if progress is not None:
            progress(r)
        out.append(r)
    return out
