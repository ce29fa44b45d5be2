"""Seeded SDE drivers.

Every path draws from its own Philox stream keyed by (seed, path index), so
single paths can be regenerated in isolation and paths can be farmed out to
workers in any order without changing results.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._backend import OK, kernels
from .errors import CollisionError, DomainError, NumericError
from .loewner import AngleConfig, LatticeSummary, MultiSlitState, new_state, run_lattice, SWALLOW_TOL

__all__ = [
    "SleParams",
    "BesselParams",
    "DrivingRecord",
    "BesselPath",
    "path_bitgen",
    "rho_drift",
    "multiradial_drift",
    "sample_radial_sle",
    "sample_radial_sle_rho",
    "sample_slice",
    "sample_multiradial_common",
    "track_spectators",
    "sample_bessel",
    "sample_coupled_gap",
    "sample_watermelon_driver",
    "sample_two_curve_lattice",
    "sample_multiradial_lattice",
    "GAP_FACTOR",
    "DT_MIN",
]

GAP_FACTOR = 10.0
DT_MIN = 1e-9


@dataclass(frozen=True)
class SleParams:
    kappa: float
    mu: float = 0.0
    rho: tuple = ()
    p: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(float(r) for r in self.rho))
        if not 0 < self.kappa < 8:
            raise DomainError(f"kappa={self.kappa} outside (0, 8)")
        if self.p < 1:
            raise DomainError("p must be positive")
        if self.rho and len(self.rho) != self.p - 1:
            raise DomainError(f"{len(self.rho)} weights for p={self.p}")


@dataclass(frozen=True)
class BesselParams:
    alpha: float
    kappa: float
    mu: float = 0.0
    x0: float = math.pi

    def __post_init__(self):
        if self.alpha <= 0 or self.kappa <= 0:
            raise DomainError("alpha and kappa must be positive")
        if self.kappa > 4 * self.alpha + 1e-12:
            raise DomainError(f"kappa={self.kappa} > 4 alpha={4 * self.alpha}")
        if not 0 < self.x0 < 2 * math.pi:
            raise DomainError(f"x0={self.x0} outside (0, 2 pi)")


@dataclass
class DrivingRecord:
    dt: float
    steps: int
    seed: int
    xi: np.ndarray
    scheme: str
    force_points: np.ndarray = None
    omegas: np.ndarray = None
    path: int = 0
    params: dict = field(default_factory=dict)
    status: int = OK
    substeps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def columns(self) -> tuple[list, np.ndarray]:
        if self.omegas is not None:
            names = [f"omega{j + 1}" for j in range(len(self.omegas))]
            return names, np.asarray(self.omegas)
        names = ["xi"]
        cols = [self.xi]
        if self.force_points is not None:
            names += [f"v{j + 2}" for j in range(len(self.force_points))]
            cols += list(self.force_points)
        return names, np.asarray(cols)

    def sidecar(self) -> dict:
        return {"params": self.params, "scheme": self.scheme, "seed": self.seed, "path": self.path,
                "dt": self.dt, "steps": self.steps, "status": self.status}

    def to_csv(self, path) -> None:
        path = Path(path)
        names, cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time"] + names)
            t = self.times
            for k in range(self.steps + 1):
                w.writerow([k, repr(float(t[k]))] + [repr(float(c[k])) for c in cols])
        with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
            json.dump(self.sidecar(), fh, indent=2)

    @classmethod
    def from_csv(cls, path) -> "DrivingRecord":
        path = Path(path)
        with open(path.with_suffix(path.suffix + ".json")) as fh:
            meta = json.load(fh)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        head, data = rows[0], np.array(rows[1:], dtype=float)
        cols = {h: data[:, i] for i, h in enumerate(head)}
        om = [cols[h] for h in head if h.startswith("omega")]
        vs = [cols[h] for h in head if h.startswith("v")]
        return cls(
            dt=meta["dt"], steps=meta["steps"], seed=meta["seed"], path=meta["path"], scheme=meta["scheme"],
            params=meta["params"], status=meta["status"],
            xi=cols["xi"] if "xi" in cols else om[0],
            force_points=np.array(vs) if vs else None,
            omegas=np.array(om) if om else None,
        )


@dataclass
class BesselPath:
    x: np.ndarray
    xmin: float
    xmax: float
    status: int
    substeps: int


def path_bitgen(seed: int, path: int = 0) -> np.random.Philox:
    """Independent counter-based stream for path ``path`` of run ``seed``."""
    return np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), int(path)]))


def rho_drift(mu: float, rho, xi: float, v) -> float:
    """Drift of the driving function of SLE_kappa^mu(rho)."""
    th = np.asarray(v, dtype=float) - xi
    return float(mu - np.sum(0.5 * np.asarray(rho) / np.tan(0.5 * th)))


def multiradial_drift(mu: float, omega) -> np.ndarray:
    """Common-time drift 2 sum_{i != j} cot((w^j - w^i)/2) + mu."""
    w = np.asarray(omega, dtype=float)
    d = 0.5 * (w[:, None] - w[None, :])
    np.fill_diagonal(d, np.pi / 2)
    return 2.0 * (np.cos(d) / np.sin(d)).sum(axis=1) + mu


def _raise_for(status: int, what: str) -> None:
    if status != OK:
        raise CollisionError(f"{what}: gap collapse after maximal refinement (status {status})")


def sample_radial_sle(params: SleParams, dt: float, steps: int, seed: int, theta: float = 0.0, path: int = 0) -> DrivingRecord:
    """xi_t = theta + sqrt(kappa) B_t + mu t with exact Gaussian increments."""
    z = np.random.Generator(path_bitgen(seed, path)).standard_normal(steps)
    inc = math.sqrt(params.kappa * dt) * z + params.mu * dt
    xi = theta + np.concatenate([[0.0], np.cumsum(inc)])
    return DrivingRecord(dt=dt, steps=steps, seed=seed, path=path, xi=xi, scheme="radial-exact",
                         params={**asdict(params), "theta": theta})


def sample_radial_sle_rho(params: SleParams, angles, dt: float, steps: int, seed: int, path: int = 0,
                          raise_on_failure: bool = True, gap_factor: float = GAP_FACTOR, dt_min: float = DT_MIN) -> DrivingRecord:
    """Euler-Maruyama for (xi, V^2..V^p) with gap-adaptive Brownian-bridge refinement."""
    cfg = angles if isinstance(angles, AngleConfig) else AngleConfig(tuple(angles))
    th = cfg.array()
    rho = np.ascontiguousarray(params.rho if params.rho else [2.0] * (cfg.p - 1), dtype=float)
    if rho.size != cfg.p - 1:
        raise DomainError("one weight per force point required")
    xi = np.empty(steps + 1)
    v = np.empty((rho.size, steps + 1))
    st, nsub = kernels.rho_path(path_bitgen(seed, path), params.kappa, params.mu, rho, th[0],
                                np.ascontiguousarray(th[1:]), dt, steps, 0, 0.0, 0.0, gap_factor, dt_min,
                                xi, v, np.empty(0))
    if raise_on_failure:
        _raise_for(st, "SLE(rho) sampler")
    return DrivingRecord(dt=dt, steps=steps, seed=seed, path=path, xi=xi, force_points=v,
                         scheme="rho-euler-adaptive", status=int(st), substeps=int(nsub),
                         params={**asdict(params), "rho": rho.tolist(), "angles": th.tolist()})


def sample_slice(kappa: float, xi0: float, spectators, dt: float, steps: int, seed: int, path: int = 0,
                 gap_factor: float = GAP_FACTOR, dt_min: float = DT_MIN):
    """Radial SLE_kappa from xi0 carrying the lifted spectators h_t(theta) and log h_t'(theta).

    Returns (xi_T, h_T, log h_T', status); the spectators must lie in (xi0, xi0 + 2 pi).
    """
    th = np.ascontiguousarray(spectators, dtype=float)
    if th.size and not (np.all(th > xi0) and np.all(th < xi0 + 2 * math.pi)):
        raise DomainError("spectators must lie in (xi0, xi0 + 2 pi)")
    out = np.empty(1 + 2 * th.size)
    st, _ = kernels.slice_path(path_bitgen(seed, path), float(kappa), float(xi0), th, float(dt), int(steps),
                               gap_factor, dt_min, out)
    q = th.size
    return float(out[0]), out[1:1 + q].copy(), out[1 + q:].copy(), int(st)


def sample_multiradial_common(params: SleParams, angles, dt: float, steps: int, seed: int, path: int = 0,
                              raise_on_failure: bool = True, gap_factor: float = GAP_FACTOR, dt_min: float = DT_MIN) -> DrivingRecord:
    """Joint-chart drivings of p curves in common time (rates a^j = 1)."""
    cfg = angles if isinstance(angles, AngleConfig) else AngleConfig(tuple(angles))
    out = np.empty((steps + 1, cfg.p))
    st, nsub = kernels.multiradial_path(path_bitgen(seed, path), params.kappa, params.mu,
                                        np.ascontiguousarray(cfg.array()), dt, steps, gap_factor, dt_min, out)
    if raise_on_failure:
        _raise_for(st, "multiradial sampler")
    om = np.ascontiguousarray(out.T)
    return DrivingRecord(dt=dt, steps=steps, seed=seed, path=path, xi=om[0], omegas=om,
                         scheme="multiradial-common-euler", status=int(st), substeps=int(nsub),
                         params={**asdict(params), "angles": cfg.array().tolist()})


def track_spectators(record: DrivingRecord, spectators: Sequence[float] = (), grid: int = 16,
                     substeps: int = 1) -> MultiSlitState:
    """Flow a MultiSlitState (rates 1) along the drivings of a common-time record."""
    om = np.asarray(record.omegas)
    state = new_state(om[:, 0], spectators=spectators, grid=grid)
    keep = state.stencil_owner < 0
    jets = np.ascontiguousarray(state.spectator_jets[keep])
    drive = np.ascontiguousarray(om.T)
    rates = np.ones_like(drive)
    k = kernels.jet_flow(jets, drive, rates, record.dt, substeps, SWALLOW_TOL)
    if k >= 0:
        raise NumericError(f"spectator swallowed at t={k * record.dt:.6g}")
    p = om.shape[0]
    T = record.steps * record.dt
    return MultiSlitState(
        driving=om[:, -1].copy(), rates=np.ones(p), spectator_angles=state.spectator_angles[keep],
        spectator_jets=jets, stencil_owner=state.stencil_owner[keep], fd_step=state.fd_step,
        common_time=T, per_curve_capacity=np.full(p, T), log_cap=p * T, initial=om[:, 0].copy(),
    )


def sample_bessel(bp: BesselParams, dt: float, steps: int, seed: int, path: int = 0, record: bool = True,
                  raise_on_failure: bool = True, gap_factor: float = GAP_FACTOR, dt_min: float = DT_MIN) -> BesselPath:
    """dX = -sqrt(kappa) dB + (alpha cot(X/2) - mu) dt; min and max include substeps."""
    out = np.empty(steps + 1 if record else 0)
    ext = np.empty(2)
    st, nsub = kernels.bessel_path(path_bitgen(seed, path), bp.kappa, bp.alpha, bp.mu, bp.x0, dt, steps,
                                   gap_factor, dt_min, out, ext)
    if raise_on_failure:
        _raise_for(st, "Bessel sampler")
    return BesselPath(x=out, xmin=float(ext[0]), xmax=float(ext[1]), status=int(st), substeps=int(nsub))


def sample_coupled_gap(params: SleParams, angles, dt: float, steps: int, seed: int, path: int = 0,
                       x0: float | str = "outer", raise_on_failure: bool = True,
                       gap_factor: float = GAP_FACTOR, dt_min: float = DT_MIN):
    """Gaps Theta^j = V^j - xi and the comparison Bessel process on the same noise.

    ``x0`` is a number or "outer" (start at Theta^p_0) / "inner" (Theta^2_0).
    Returns (theta array of shape (p - 1, steps + 1), X path, status).
    """
    cfg = angles if isinstance(angles, AngleConfig) else AngleConfig(tuple(angles))
    th = cfg.array()
    rho = np.ascontiguousarray(params.rho if params.rho else [2.0] * (cfg.p - 1), dtype=float)
    if np.any(rho < 0):
        raise DomainError("the coupling needs nonnegative weights")
    gaps0 = th[1:] - th[0]
    if x0 == "outer":
        x0v = float(gaps0[-1])
    elif x0 == "inner":
        x0v = float(gaps0[0])
    else:
        x0v = float(x0)
    alpha = 1.0 + 0.5 * float(rho.sum())
    xi = np.empty(steps + 1)
    v = np.empty((rho.size, steps + 1))
    x = np.empty(steps + 1)
    st, _ = kernels.rho_path(path_bitgen(seed, path), params.kappa, params.mu, rho, th[0],
                             np.ascontiguousarray(th[1:]), dt, steps, 1, alpha, x0v, gap_factor, dt_min, xi, v, x)
    if raise_on_failure:
        _raise_for(st, "coupled gap sampler")
    return v - xi[None, :], x, int(st)


def sample_watermelon_driver(kappa: float, n: int, angles, target: float, dt: float, steps: int, seed: int,
                             mu: float = 0.0, path: int = 0) -> DrivingRecord:
    """Experimental: radial SLE_kappa^mu(2, ..., 2, kappa - 4 - 2n) with the last weight at the target.

    The negative weight leaves the regime where gaps are known not to
    collapse, so failures are reported in ``status`` instead of raised.
    """
    cfg = angles if isinstance(angles, AngleConfig) else AngleConfig(tuple(angles))
    if cfg.p != n:
        raise DomainError(f"{cfg.p} starting points for n={n}")
    th = cfg.array()
    tg = th[0] + math.fmod(target - th[0], 2 * math.pi)
    if tg <= th[0]:
        tg += 2 * math.pi
    if np.any(np.abs(np.r_[th, th[0] + 2 * math.pi] - tg) < 1e-12):
        raise DomainError("target coincides with a starting point")
    rho = np.array([2.0] * (n - 1) + [kappa - 4.0 - 2.0 * n])
    v0 = np.ascontiguousarray(np.r_[th[1:], tg])
    xi = np.empty(steps + 1)
    v = np.empty((rho.size, steps + 1))
    st, nsub = kernels.rho_path(path_bitgen(seed, path), kappa, mu, rho, th[0], v0, dt, steps, 0, 0.0, 0.0,
                                GAP_FACTOR, DT_MIN, xi, v, np.empty(0))
    return DrivingRecord(dt=dt, steps=steps, seed=seed, path=path, xi=xi, force_points=v,
                         scheme="watermelon-experimental", status=int(st), substeps=int(nsub),
                         params={"kappa": kappa, "mu": mu, "n": n, "rho": rho.tolist(), "angles": th.tolist(),
                                 "target": tg})


def sample_two_curve_lattice(kappa: float, theta, schedule, delta: float, seed: int, path: int = 0) -> LatticeSummary:
    """Independent radial SLE_kappa curves grown by a staircase schedule (base measure)."""
    summ, _ = run_lattice(path_bitgen(seed, path), kappa, 0.0, theta, mode=0, schedule=schedule, delta=delta)
    return summ


def sample_multiradial_lattice(params: SleParams, theta, dt: float, t_own: float, seed: int, path: int = 0,
                               history: int = 0, clock: str = "common", max_steps: int | None = None):
    """Two-curve multiradial SLE until curve 1 has own capacity t_own.

    Both curves follow the tilted drift kappa * (b h''/h' + h' d_j log Z)
    in own time.  With clock="common" curve j advances by
    dt / h'_{t,j}(xi^j)^2 of own capacity per common step.  With
    clock="own" the curve that is behind in own time advances by at most dt; the law
    of curve 1 at own time t_own does not depend on the growth schedule.
    Returns (LatticeSummary, history rows (t, t_1, t_2, omega^2 - omega^1)).
    """
    if params.p != 2:
        raise DomainError("the lattice sampler handles p = 2")
    if clock not in ("common", "own"):
        raise DomainError(f"unknown clock {clock!r}")
    return run_lattice(path_bitgen(seed, path), params.kappa, params.mu, theta, mode=1 if clock == "common" else 2,
                       dt=dt, t_own=t_own, history=history, max_steps=max_steps)
