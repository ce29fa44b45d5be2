"""Statistical and pathwise checks of the multiradial SLE identities.

Every check takes a ``mapper`` with the semantics of the builtin ``map``
(ordered results); the CLI passes a process-pool map, tests use the default.
Per-path work lives in module-level functions so it pickles.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import AccuracyError, BranchError, DomainError, NumericError
from .loewner import AngleConfig, trace_single
from .partition import exponents, fusion_constant, rainbow_numeric, z_fusion_h, z_multiradial, z_shuffle_h
from .samplers import (
    BesselParams,
    SleParams,
    sample_bessel,
    sample_coupled_gap,
    sample_multiradial_lattice,
    sample_radial_sle,
    sample_radial_sle_rho,
    sample_slice,
    sample_two_curve_lattice,
)

__all__ = [
    "McReport",
    "FitReport",
    "KsReport",
    "PathwiseReport",
    "side_seed",
    "check_spiral_martingale",
    "check_slice_martingale",
    "check_two_time_martingale",
    "check_resampling_marginal",
    "check_transience",
    "fit_hitting_exponent",
    "check_fusion_limit",
    "check_gap_decay",
    "check_coupling",
    "check_common_time_inequality",
]

Mapper = Callable


def _dict(obj) -> dict:
    d = asdict(obj)
    d["pass"] = d.pop("passed")
    return d


@dataclass
class McReport:
    name: str
    estimate: float
    std_error: float
    n_paths: int
    target: float
    z_score: float
    passed: bool
    tolerance: float = 3.0
    dt: float | None = None
    n_failed: int = 0
    max_share: float = 0.0
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _dict(self)


@dataclass
class FitReport:
    name: str
    slope: float
    intercept: float
    r2: float
    points: list
    target: float
    tolerance: float
    passed: bool
    params: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return _dict(self)


@dataclass
class KsReport:
    name: str
    functionals: list
    statistics: list
    pvalues: list
    n_a: int
    n_b: int
    passed: bool
    threshold: float = 0.01
    n_failed: int = 0
    inconclusive: bool = False
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _dict(self)


@dataclass
class PathwiseReport:
    name: str
    n_paths: int
    n_violations: int
    n_failed: int
    worst_margin: float
    passed: bool
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _dict(self)


def side_seed(seed: int, k: int) -> int:
    """Independent derived seed for the k-th sample family of one check."""
    return int(np.random.SeedSequence([int(seed), 0x51DE, int(k)]).generate_state(1, np.uint64)[0])


MAX_SHARE = 0.05


def _mc(name, values, target, tolerance, dt, params, n_failed=0) -> McReport:
    """z-test of the sample mean against ``target``.

    A sample where one path carries more than MAX_SHARE of the total mass
    (with at least 100 paths) fails regardless of z: its standard error is
    then driven by that path and does not measure anything.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    est = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if se > 0:
        z = (est - target) / se
    else:
        # deterministic sample: exact agreement is required
        z = 0.0 if abs(est - target) <= 1e-12 * max(1.0, abs(target)) else math.inf
    total = float(np.abs(v).sum())
    share = float(np.abs(v).max() / total) if total > 0 else 0.0
    ok = abs(z) <= tolerance and (n < 100 or share <= MAX_SHARE)
    return McReport(name=name, estimate=est, std_error=se, n_paths=n, target=float(target), z_score=float(z),
                    passed=bool(ok), tolerance=tolerance, dt=dt, n_failed=int(n_failed), max_share=share,
                    params=params)


def _steps(T: float, dt: float) -> int:
    return int(round(T / dt))


# ---------------------------------------------------------------- martingales


def _spiral_one(args):
    kappa, mu, theta, T, dt, seed, i = args
    rec = sample_radial_sle(SleParams(kappa, 0.0), dt, _steps(T, dt), seed, theta, i)
    return math.exp((mu / kappa) * (rec.xi[-1] - 0.5 * mu * T))


def check_spiral_martingale(kappa: float, mu: float, theta: float, T: float, n_paths: int, seed: int,
                            dt: float = 1e-4, mapper: Mapper = map) -> McReport:
    """E exp((mu/kappa)(xi_T - mu T/2)) under radial SLE_kappa from theta equals exp(mu theta / kappa)."""
    vals = list(mapper(_spiral_one, [(kappa, mu, theta, T, dt, seed, i) for i in range(n_paths)]))
    params = dict(kappa=kappa, mu=mu, theta=theta, T=T, seed=seed)
    return _mc("spiral_martingale", vals, math.exp(mu * theta / kappa), 3.0, dt, params)


def _slice_one(args):
    kappa, mu, th, T, dt, seed, i = args
    xi, h, lh, st = sample_slice(kappa, th[0], th[1:], dt, _steps(T, dt), seed, i)
    if st:
        # gap below the refinement floor: the stopped martingale is ~ gap^(2/kappa), i.e. 0
        return 0.0, 1
    p = len(th)
    lm = ((p * p - 1 - mu * mu) / (2 * kappa)) * T + exponents(kappa).b * float(lh.sum())
    try:
        lz = z_multiradial(kappa, mu, np.r_[xi, h]).log_abs
    except DomainError:
        # marked points merged in floating point: same degenerate limit
        return 0.0, 1
    return math.exp(lm + lz - z_multiradial(kappa, mu, th).log_abs), 0


def check_slice_martingale(kappa: float, mu: float, p: int, angles, T: float, n_paths: int, seed: int,
                           dt: float = 1e-4, mapper: Mapper = map) -> McReport:
    """Single growth of curve 1 under radial SLE_kappa with the other p - 1 points as spectators.

    A path whose spectator gap collapses below the refinement floor is
    stopped there and contributes M = 0 (M carries sin(gap/2)^(2/kappa));
    such paths are counted in n_failed.  Dropping them instead would bias
    the mean upward by the failure fraction.
    """
    th = AngleConfig(tuple(angles)).array()
    if th.size != p:
        raise DomainError(f"{th.size} angles for p={p}")
    res = list(mapper(_slice_one, [(kappa, mu, th, T, dt, seed, i) for i in range(n_paths)]))
    params = dict(kappa=kappa, mu=mu, p=p, angles=th.tolist(), T=T, seed=seed)
    return _mc("slice_martingale", [r[0] for r in res], 1.0, 3.0, dt, params, sum(r[1] for r in res))


def _two_time_one(args):
    kappa, mu, th, schedule, delta, seed, i, lz0 = args
    s = sample_two_curve_lattice(kappa, th, schedule, delta, seed, i)
    if s.status != 0:
        # the curves met (or a tip was swallowed): the indicator kills the path
        return 0.0, 1
    E = exponents(kappa)
    lm = (
        (E.c / 2) * s.m
        - E.b_tilde * (s.t1 + s.t2)
        + (E.b_tilde + 3 / (2 * kappa) - mu * mu / (2 * kappa)) * s.log_cap
        + E.b * (math.log(s.jet1.h1) + math.log(s.jet2.h1))
        + z_multiradial(kappa, mu, s.omega).log_abs
        - lz0
    )
    return math.exp(lm), 0


DEFAULT_STAIRCASE = ((1, 0.05), (2, 0.05)) * 4


def check_two_time_martingale(kappa: float, mu: float, angles, schedule=DEFAULT_STAIRCASE, n_paths: int = 4000,
                              seed: int = 0, delta: float = 1e-3, tolerance: float = 3.0,
                              mapper: Mapper = map) -> McReport:
    """Full two-curve martingale (with the loop term m) under independent radial SLEs."""
    th = AngleConfig(tuple(angles)).array()
    if th.size != 2:
        raise DomainError("the two-time check uses p = 2")
    lz0 = z_multiradial(kappa, mu, th).log_abs
    sched = tuple((int(c), float(a)) for c, a in schedule)
    res = list(mapper(_two_time_one, [(kappa, mu, th, sched, delta, seed, i, lz0) for i in range(n_paths)]))
    vals = [r[0] for r in res]
    params = dict(kappa=kappa, mu=mu, angles=th.tolist(), schedule=[list(x) for x in sched], seed=seed)
    return _mc("two_time_martingale", vals, 1.0, tolerance, delta, params, sum(r[1] for r in res))


# ---------------------------------------------------------------- resampling marginal


def _marginal_lattice(args):
    kappa, mu, th, T, dt, seed, i = args
    s, _ = sample_multiradial_lattice(SleParams(kappa, mu, (2.0,), 2), th, dt, T, seed, i, clock="own")
    if s.status != 0:
        return None
    return (s.xi1, s.running_max, s.force - s.xi1)


def _marginal_rho(args):
    kappa, mu, th, T, dt, seed, i = args
    p = len(th)
    r = sample_radial_sle_rho(SleParams(kappa, mu, (2.0,) * (p - 1), p), th, dt, _steps(T, dt), seed, i,
                              raise_on_failure=False)
    if r.status != 0:
        return None
    if p == 1:
        return (r.xi[-1], r.xi.max())
    return (r.xi[-1], r.xi.max(), r.force_points[0, -1] - r.xi[-1])


def _marginal_exact(args):
    kappa, mu, th, T, dt, seed, i = args
    r = sample_radial_sle(SleParams(kappa, mu), dt, _steps(T, dt), seed, th[0], i)
    return (r.xi[-1], r.xi.max())


def check_resampling_marginal(kappa: float, mu: float, p: int, angles, T: float, n_paths: int, seed: int,
                              dt: float = 2e-3, dt_ref: float = 1e-3, threshold: float = 0.01,
                              mapper: Mapper = map) -> KsReport:
    """Two-sample KS comparison of the first driving function against SLE_kappa^mu(2, ..., 2).

    p = 2: the two-curve multiradial lattice (own-time schedule, curve 1
    stopped at own capacity T) against the Euler SLE(2) sampler.  p = 1:
    exact radial increments against the Euler sampler.  Functionals are the
    terminal value, the running maximum and, for p = 2, the terminal gap to
    the force point.
    """
    th = AngleConfig(tuple(angles)).array()
    if th.size != p or p not in (1, 2):
        raise DomainError("the marginal comparison handles p in {1, 2} with p angles")
    sa, sb = side_seed(seed, 0), side_seed(seed, 1)
    first = _marginal_lattice if p == 2 else _marginal_exact
    dt_a = dt if p == 2 else dt_ref
    A = list(mapper(first, [(kappa, mu, th, T, dt_a, sa, i) for i in range(n_paths)]))
    B = list(mapper(_marginal_rho, [(kappa, mu, th, T, dt_ref, sb, i) for i in range(n_paths)]))
    fa = np.array([a for a in A if a is not None])
    fb = np.array([b for b in B if b is not None])
    n_failed = 2 * n_paths - len(fa) - len(fb)
    names = ["terminal", "running_max", "force_gap"][: 2 if p == 1 else 3]
    params = dict(kappa=kappa, mu=mu, p=p, angles=th.tolist(), T=T, seed=seed, dt=dt, dt_ref=dt_ref)
    if min(len(fa), len(fb)) < 0.9 * n_paths:
        return KsReport("resampling_marginal", names, [], [], len(fa), len(fb), False, threshold, n_failed,
                        inconclusive=True, params=params)
    tests = [stats.ks_2samp(fa[:, k], fb[:, k]) for k in range(len(names))]
    pv = [float(t.pvalue) for t in tests]
    return KsReport("resampling_marginal", names, [float(t.statistic) for t in tests], pv, len(fa), len(fb),
                    bool(min(pv) > threshold), threshold, n_failed, params=params)


# ---------------------------------------------------------------- pathwise laws


def _check_rho(rho, kappa):
    rho = tuple(float(r) for r in rho)
    if any(r < 0 for r in rho):
        raise DomainError("transience and coupling need rho_j >= 0")
    if not 0 < kappa <= 4:
        raise DomainError("transience needs kappa in (0, 4]")
    return rho


def _driving(kappa, mu, rho, th, dt, steps, seed, i):
    if th.size == 1:
        return sample_radial_sle(SleParams(kappa, mu), dt, steps, seed, th[0], i).xi, 0
    r = sample_radial_sle_rho(SleParams(kappa, mu, rho, th.size), th, dt, steps, seed, i, raise_on_failure=False)
    return r.xi, r.status


def _transience_one(args):
    kappa, mu, rho, th, N, dt, slack, seed, i = args
    xi, st = _driving(kappa, mu, rho, th, dt, int(math.ceil((N + 2 * slack) / dt)), seed, i)
    if st:
        return None
    try:
        t, z = trace_single(xi, dt, 1, math.exp(-N))
    except NumericError:
        return None
    dist = np.minimum.accumulate(np.abs(z))
    taus = []
    for n in range(1, N + 1):
        hit = np.nonzero(dist <= math.exp(-n))[0]
        taus.append(float(t[hit[0]]) if hit.size else math.inf)
    return taus


def check_transience(kappa: float, mu: float, rho, angles, horizon_n: int = 5, n_paths: int = 500, seed: int = 0,
                     dt: float = 5e-3, slack: float = 0.05, mapper: Mapper = map) -> PathwiseReport:
    """Capacity window n - log 4 - slack <= tau_n <= n + slack for n = 1..horizon_n.

    tau_n is the first time the traced curve comes within e^{-n} of the
    target.  The reported fraction counts paths with tau_N <= N + slack, that
    is |gamma| < e^{-N} reached by the horizon up to the grid slack.
    """
    rho = _check_rho(rho, kappa)
    th = AngleConfig(tuple(angles)).array()
    if len(rho) != th.size - 1:
        raise DomainError("one weight per force point required")
    res = list(mapper(_transience_one, [(kappa, mu, rho, th, horizon_n, dt, slack, seed, i) for i in range(n_paths)]))
    ok = [r for r in res if r is not None]
    worst = math.inf
    viol = 0
    for taus in ok:
        bad = False
        for n, tau in enumerate(taus, start=1):
            m = min(tau - (n - math.log(4) - slack), n + slack - tau)
            worst = min(worst, m)
            bad |= m < 0
        viol += bad
    frac = float(np.mean([r[-1] <= horizon_n + slack for r in ok])) if ok else 0.0
    n_failed = len(res) - len(ok)
    params = dict(kappa=kappa, mu=mu, rho=list(rho), angles=th.tolist(), horizon_n=horizon_n, dt=dt, slack=slack,
                  seed=seed)
    return PathwiseReport("transience", n_paths, viol, n_failed, float(worst), viol == 0 and n_failed == 0, params,
                          {"fraction_reached": frac})


def _gap_one(args):
    kappa, mu, rho, th, T, dt, slack, seed, i = args
    r = sample_radial_sle_rho(SleParams(kappa, mu, rho, th.size), th, dt, _steps(T, dt), seed, i,
                              raise_on_failure=False)
    if r.status:
        return None
    d = r.force_points[-1] - r.force_points[0]
    d0 = d[0]
    C = math.sin(d0 / 2) / d0 if d0 > 0 else 0.5
    bound = d0 * np.exp(-C * r.times)
    return float(min(d.min() + slack, (bound + slack - d).min()))


def check_gap_decay(kappa: float, mu: float, rho, angles, T: float = 2.0, n_paths: int = 500, seed: int = 0,
                    dt: float = 1e-3, slack: float = 1e-3, mapper: Mapper = map) -> PathwiseReport:
    """0 <= Theta^p_t - Theta^2_t <= (Theta^p_0 - Theta^2_0) exp(-C t) at every grid time.

    C = inf sin(u/2)/u over [0, Theta^p_0 - Theta^2_0], attained at the right
    end since sin(u/2)/u decreases on (0, 2 pi).
    """
    rho = _check_rho(rho, 4.0 if kappa > 4 else kappa)
    th = AngleConfig(tuple(angles)).array()
    if th.size < 3 or len(rho) != th.size - 1:
        raise DomainError("gap decay needs p >= 3 and p - 1 weights")
    res = list(mapper(_gap_one, [(kappa, mu, rho, th, T, dt, slack, seed, i) for i in range(n_paths)]))
    ok = [r for r in res if r is not None]
    viol = sum(r < 0 for r in ok)
    n_failed = len(res) - len(ok)
    params = dict(kappa=kappa, mu=mu, rho=list(rho), angles=th.tolist(), T=T, dt=dt, slack=slack, seed=seed)
    return PathwiseReport("gap_decay", n_paths, int(viol), n_failed, float(min(ok, default=math.nan)),
                          viol == 0 and n_failed == 0, params)


def _coupling_one(args):
    kappa, mu, rho, th, T, dt, seed, i = args
    P = SleParams(kappa, mu, rho, th.size)
    g_out, x_out, s1 = sample_coupled_gap(P, th, dt, _steps(T, dt), seed, i, x0="outer", raise_on_failure=False)
    g_in, x_in, s2 = sample_coupled_gap(P, th, dt, _steps(T, dt), seed, i, x0="inner", raise_on_failure=False)
    if s1 or s2:
        return None
    return float(min((g_out[-1] - x_out).min(), (x_in - g_in[0]).min()))


def check_coupling(kappa: float, mu: float, rho, angles, T: float = 2.0, n_paths: int = 500, seed: int = 0,
                   dt: float = 1e-3, tol: float = 1e-9, mapper: Mapper = map) -> PathwiseReport:
    """Monotone coupling with the radial Bessel process of alpha = 1 + sum(rho)/2.

    Started at Theta^p_0 the Bessel process stays below Theta^p; started at
    Theta^2_0 it stays above Theta^2 (same noise, every grid point).
    """
    rho = _check_rho(rho, 4.0 if kappa > 4 else kappa)
    th = AngleConfig(tuple(angles)).array()
    if len(rho) != th.size - 1 or th.size < 2:
        raise DomainError("coupling needs p >= 2 and p - 1 weights")
    res = list(mapper(_coupling_one, [(kappa, mu, rho, th, T, dt, seed, i) for i in range(n_paths)]))
    ok = [r for r in res if r is not None]
    viol = sum(r < -tol for r in ok)
    n_failed = len(res) - len(ok)
    params = dict(kappa=kappa, mu=mu, rho=list(rho), angles=th.tolist(), T=T, dt=dt, tol=tol, seed=seed)
    return PathwiseReport("coupling", n_paths, int(viol), n_failed, float(min(ok, default=math.nan)),
                          viol == 0 and n_failed == 0, params)


def _common_time_one(args):
    kappa, mu, th, T, dt, tol, seed, i = args
    nh = 64 * int(math.ceil(T / dt)) + 16
    s, h = sample_multiradial_lattice(SleParams(kappa, mu, (2.0,), 2), th, dt, T, seed, i, history=nh)
    if s.status != 0:
        return None
    t = h[:, 0]
    lo = np.minimum(h[:, 1], h[:, 2]) - (t - tol)
    hi = (2 * t + tol) - np.maximum(h[:, 1], h[:, 2])
    return float(min(lo.min(), hi.min()))


def check_common_time_inequality(kappa: float, mu: float, angles, T: float = 0.5, n_paths: int = 500,
                                 seed: int = 0, dt: float = 2e-3, tol: float = 1e-9,
                                 mapper: Mapper = map) -> PathwiseReport:
    """t <= t_j(t) <= 2 t along the common-time lattice sampler (p = 2) until t_1 = T."""
    th = AngleConfig(tuple(angles)).array()
    if th.size != 2:
        raise DomainError("the lattice sampler handles p = 2")
    res = list(mapper(_common_time_one, [(kappa, mu, th, T, dt, tol, seed, i) for i in range(n_paths)]))
    ok = [r for r in res if r is not None]
    viol = sum(r < 0 for r in ok)
    n_failed = len(res) - len(ok)
    params = dict(kappa=kappa, mu=mu, angles=th.tolist(), T=T, dt=dt, tol=tol, seed=seed)
    return PathwiseReport("common_time_inequality", n_paths, int(viol), n_failed, float(min(ok, default=math.nan)),
                          viol == 0 and n_failed == 0, params)


# ---------------------------------------------------------------- Bessel exponent


def _bessel_one(args):
    bp, t0, dt, seed, i = args
    r = sample_bessel(bp, dt, _steps(t0, dt), seed, i, record=False, raise_on_failure=False)
    # a collapsed gap has certainly gone below every level
    return (r.xmin if r.status == 0 else 0.0), r.status


def _fit(xs, ys):
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * np.asarray(xs) + intercept
    ss = float(np.sum((np.asarray(ys) - np.mean(ys)) ** 2))
    r2 = 1.0 - float(np.sum((np.asarray(ys) - pred) ** 2)) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def fit_hitting_exponent(bp: BesselParams, epsilons: Sequence[float], t0: float, n_paths: int, seed: int,
                         dt: float = 1e-3, tolerance: float = 0.15, mapper: Mapper = map) -> FitReport:
    """Log-log slope of P[min_{t <= t0} X_t <= eps X_0] against 4 alpha / kappa - 1."""
    eps = np.sort(np.asarray(epsilons, dtype=float))
    if eps.size < 3 or eps[-1] / eps[0] < 4:
        raise DomainError("need at least three epsilons spanning a factor of 4")
    res = list(mapper(_bessel_one, [(bp, t0, dt, seed, i) for i in range(n_paths)]))
    xmin = np.array([r[0] for r in res])
    counts = [int(np.sum(xmin <= e * bp.x0)) for e in eps]
    target = 4 * bp.alpha / bp.kappa - 1
    params = dict(asdict(bp), epsilons=eps.tolist(), t0=t0, n_paths=n_paths, dt=dt, seed=seed, counts=counts,
                  n_failed=int(sum(r[1] != 0 for r in res)))
    if min(counts) == 0:
        return FitReport("hitting_exponent", math.nan, math.nan, math.nan, [], target, tolerance, False, params,
                         note="empty epsilon cell: widen epsilons or raise n_paths")
    lx = np.log(eps)
    ly = np.log(np.array(counts) / n_paths)
    slope, intercept, r2 = _fit(lx, ly)
    return FitReport("hitting_exponent", slope, intercept, r2, [[float(a), float(b)] for a, b in zip(lx, ly)],
                     target, tolerance, bool(abs(slope - target) <= tolerance * abs(target)), params)


# ---------------------------------------------------------------- fusion limit


def check_fusion_limit(n: int, kappa: float, starts: Sequence[float] | None = None, y: float | None = None,
                       epsilons: Sequence[float] = (0.1, 0.05, 0.025), tolerance: float = 0.02) -> FitReport:
    """Rainbow / shuffle(ends) against A_n Z_fusion as the ends cluster at y.

    Defaults: starts 0, 1, ..., n - 1 and y = 4.  Ends are
    y^j = y + eps (n - j + 1).  Passes when the deviation decreases
    along the (decreasing) epsilons and the last one is below ``tolerance``;
    the fitted slope is the observed order, reported but not gated.
    """
    if n not in (1, 2):
        raise DomainError("fusion limit implemented for n = 1, 2")
    xs = list(starts) if starts is not None else [float(k) for k in range(n)]
    y = float(y) if y is not None else 4.0
    eps = sorted((float(e) for e in epsilons), reverse=True)
    An = fusion_constant(n, kappa)
    lim = math.log(An) + z_fusion_h(kappa, xs, y)
    dev = []
    for e in eps:
        ys = [y + e * (n - j) for j in range(n)]
        try:
            lr = rainbow_numeric(n, kappa, xs, ys).log_abs
        except (AccuracyError, BranchError) as exc:
            raise NumericError(f"rainbow quadrature failed at eps={e}: {exc}") from exc
        dev.append(abs(math.expm1(lr - z_shuffle_h(kappa, ys) - lim)))
    lx = np.log(eps)
    ly = np.log(np.maximum(dev, 1e-300))
    slope, intercept, r2 = _fit(lx, ly)
    mono = all(b < a for a, b in zip(dev[:-1], dev[1:]))
    params = dict(n=n, kappa=kappa, starts=xs, y=y, epsilons=eps, deviations=dev, A_n=An)
    return FitReport("fusion_limit", slope, intercept, r2, [[float(a), float(b)] for a, b in zip(lx, ly)],
                     0.0, tolerance, bool(mono and dev[-1] < tolerance), params)
