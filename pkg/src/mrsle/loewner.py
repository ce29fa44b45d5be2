"""Radial Loewner engine.

Boundary points are tracked through the covering map h_t (g_t(e^{i theta}) =
e^{i h_t(theta)}) together with its first three theta-derivatives, which is
all the martingale bookkeeping needs.  Forward flows run on the compiled
kernels; tips are recovered by composing inverse slit maps (zipper).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._backend import kernels
from .errors import CollisionError, DomainError, NumericError, StencilError, SwallowedError

__all__ = [
    "AngleConfig",
    "DerivativeJet",
    "MultiSlitState",
    "CurveTrace",
    "LatticeSummary",
    "velocity",
    "flow_covering",
    "new_state",
    "multislit_step",
    "schwarzian_n",
    "accumulate_m",
    "tip_jet_estimate",
    "trace_curves",
    "trace_single",
    "common_to_multi_time",
    "run_lattice",
]

TWO_PI = 2 * math.pi
COLLISION_GAP = 1e-4
SWALLOW_TOL = 1e-9
# offsets (in units of fd_step) of the material points kept around each tip
_STENCIL = (-4, -2, -1, 1, 2, 4)


@dataclass(frozen=True)
class AngleConfig:
    angles: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.angles)
        object.__setattr__(self, "angles", a)
        if not a:
            raise DomainError("empty angle configuration")
        if any(not math.isfinite(x) for x in a):
            raise DomainError("non-finite angle")
        if any(a[i + 1] <= a[i] for i in range(len(a) - 1)) or a[-1] >= a[0] + TWO_PI:
            raise DomainError(f"angles {a} are not ordered on the torus")

    @property
    def p(self) -> int:
        return len(self.angles)

    def array(self) -> np.ndarray:
        return np.array(self.angles)


@dataclass(frozen=True)
class DerivativeJet:
    h: float
    h1: float = 1.0
    h2: float = 0.0
    h3: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.h1, self.h2, self.h3])

    @classmethod
    def from_array(cls, a) -> "DerivativeJet":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @property
    def schwarzian(self) -> float:
        r = self.h2 / self.h1
        return self.h3 / self.h1 - 1.5 * r * r


def velocity(theta, driving, rates) -> np.ndarray:
    """Superposed covering-Loewner field sum_j a^j cot((theta - omega^j)/2)."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))[:, None]
    d = 0.5 * (th - np.asarray(driving, dtype=float)[None, :])
    return (np.asarray(rates, dtype=float)[None, :] * np.cos(d) / np.sin(d)).sum(axis=1)


def flow_covering(jet: DerivativeJet, xi_path, duration: float, rate: float = 1.0, substeps: int = 4) -> DerivativeJet:
    """Advance a jet over [0, duration] along a driving sampled on a uniform grid.

    The driving is interpolated linearly between samples; a constant
    ``xi_path`` (a scalar) means frozen driving.
    """
    xi = np.atleast_1d(np.asarray(xi_path, dtype=float))
    if xi.size == 1:
        xi = np.repeat(xi, 2)
    m = xi.size - 1
    jets = np.ascontiguousarray([jet.as_array()])
    drive = np.ascontiguousarray(xi[:, None])
    rates = np.full((m + 1, 1), float(rate))
    k = kernels.jet_flow(jets, drive, rates, duration / m, int(substeps), SWALLOW_TOL)
    if k >= 0:
        raise SwallowedError(f"point swallowed at t={k * duration / m:.6g}", time=k * duration / m)
    return DerivativeJet.from_array(jets[0])


@dataclass
class MultiSlitState:
    """Joint chart of p curves grown by the multi-slit equation.

    ``per_curve_capacity[j]`` is the integral of a^j dt, the part of
    log g'(0) contributed by curve j, so log_cap equals its sum.
    Spectators are material angles with their current jets (rows of
    ``spectator_jets``: h, h1, h2, h3).  ``stencil_owner`` marks material
    points kept around each tip for tip_jet_estimate (-1 for ordinary ones).
    """

    driving: np.ndarray
    rates: np.ndarray
    spectator_angles: np.ndarray
    spectator_jets: np.ndarray
    stencil_owner: np.ndarray
    fd_step: float
    common_time: float = 0.0
    per_curve_capacity: np.ndarray = None
    log_cap: float = 0.0
    m_acc: float = 0.0
    initial: np.ndarray = None

    def __post_init__(self):
        p = len(self.driving)
        if self.per_curve_capacity is None:
            self.per_curve_capacity = np.zeros(p)
        if self.initial is None:
            self.initial = np.array(self.driving, dtype=float)

    @property
    def p(self) -> int:
        return len(self.driving)

    def copy(self) -> "MultiSlitState":
        return MultiSlitState(
            driving=self.driving.copy(),
            rates=self.rates.copy(),
            spectator_angles=self.spectator_angles.copy(),
            spectator_jets=self.spectator_jets.copy(),
            stencil_owner=self.stencil_owner.copy(),
            fd_step=self.fd_step,
            common_time=self.common_time,
            per_curve_capacity=self.per_curve_capacity.copy(),
            log_cap=self.log_cap,
            m_acc=self.m_acc,
            initial=self.initial.copy(),
        )

    def jet_of(self, theta: float) -> DerivativeJet:
        i = int(np.argmin(np.abs(self.spectator_angles - theta)))
        if abs(self.spectator_angles[i] - theta) > 1e-12:
            raise DomainError(f"angle {theta} is not tracked")
        return DerivativeJet.from_array(self.spectator_jets[i])

    def to_dict(self) -> dict:
        return {
            "common_time": self.common_time,
            "per_curve_capacity": self.per_curve_capacity.tolist(),
            "driving": self.driving.tolist(),
            "spectator_jets": [
                {"theta": float(t), "h": j[0], "h1": j[1], "h2": j[2], "h3": j[3], "stencil_owner": int(o)}
                for t, j, o in zip(self.spectator_angles, self.spectator_jets.tolist(), self.stencil_owner)
            ],
            "log_cap": self.log_cap,
            "m_acc": self.m_acc,
            "rates": self.rates.tolist(),
            "fd_step": self.fd_step,
            "initial": self.initial.tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "MultiSlitState":
        sj = d["spectator_jets"]
        return cls(
            driving=np.array(d["driving"], dtype=float),
            rates=np.array(d["rates"], dtype=float),
            spectator_angles=np.array([s["theta"] for s in sj], dtype=float),
            spectator_jets=np.array([[s["h"], s["h1"], s["h2"], s["h3"]] for s in sj], dtype=float).reshape(-1, 4),
            stencil_owner=np.array([s["stencil_owner"] for s in sj], dtype=int),
            fd_step=float(d["fd_step"]),
            common_time=float(d["common_time"]),
            per_curve_capacity=np.array(d["per_curve_capacity"], dtype=float),
            log_cap=float(d["log_cap"]),
            m_acc=float(d["m_acc"]),
            initial=np.array(d["initial"], dtype=float),
        )

    @classmethod
    def from_json(cls, path) -> "MultiSlitState":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def new_state(angles, spectators: Sequence[float] = (), grid: int = 64, fd_step: float = 1e-3, rates=None) -> MultiSlitState:
    """Identity chart at the configuration ``angles``.

    Tracks the user spectators, ``grid`` material angles per arc between
    consecutive marked points, the marked points themselves and a
    finite-difference stencil around each of them.
    """
    cfg = angles if isinstance(angles, AngleConfig) else AngleConfig(tuple(angles))
    th = cfg.array()
    p = cfg.p
    pts = [float(s) for s in spectators]
    own = [-1] * len(pts)
    for j in range(p):
        a = th[j]
        b = th[j + 1] if j + 1 < p else th[0] + TWO_PI
        inner = np.linspace(a, b, grid + 2)[1:-1]
        keep = inner[(inner - a > 8 * fd_step) & (b - inner > 8 * fd_step)]
        pts.extend(keep.tolist())
        own.extend([-1] * keep.size)
    for j in range(p):
        # the marked point belongs to its stencil and is dropped with it once curve j grows
        pts.append(th[j])
        own.append(j)
        for o in _STENCIL:
            pts.append(th[j] + o * fd_step)
            own.append(j)
    ang = np.array(pts)
    jets = np.zeros((ang.size, 4))
    jets[:, 0] = ang
    jets[:, 1] = 1.0
    r = np.ones(p) if rates is None else np.asarray(rates, dtype=float)
    return MultiSlitState(
        driving=th.copy(),
        rates=r,
        spectator_angles=ang,
        spectator_jets=jets,
        stencil_owner=np.array(own, dtype=int),
        fd_step=float(fd_step),
    )


def _check_gaps(omega: np.ndarray, t: float) -> None:
    p = omega.size
    if p < 2:
        return
    gaps = np.diff(np.r_[omega, omega[0] + TWO_PI])
    i = int(np.argmin(gaps))
    if gaps[i] < COLLISION_GAP:
        raise CollisionError(f"driving gap {gaps[i]:.3g} below threshold", pair=(i, (i + 1) % p), time=t)


def multislit_step(state: MultiSlitState, increments, dt: float, rates=None, substeps: int = 4) -> MultiSlitState:
    """Advance the joint chart by common time dt.

    Driving moves linearly from omega to omega + increments over the step;
    every tracked jet follows the superposed field with rates a^j.
    """
    inc = np.asarray(increments, dtype=float)
    a = state.rates if rates is None else np.asarray(rates, dtype=float)
    _check_gaps(state.driving, state.common_time)
    new = state.copy()
    new.rates = a.copy()
    # a stencil next to a growing tip is meaningless once that curve has grown
    grow = a * dt > 0
    drop = np.isin(new.stencil_owner, np.flatnonzero(grow))
    if drop.any():
        keep = ~drop
        new.spectator_angles = new.spectator_angles[keep]
        new.spectator_jets = new.spectator_jets[keep]
        new.stencil_owner = new.stencil_owner[keep]
    drive = np.ascontiguousarray([state.driving, state.driving + inc])
    rr = np.ascontiguousarray([a, a])
    jets = np.ascontiguousarray(new.spectator_jets)
    k = kernels.jet_flow(jets, drive, rr, dt, int(substeps), SWALLOW_TOL)
    if k >= 0:
        raise SwallowedError("tracked point swallowed", time=state.common_time)
    new.spectator_jets = jets
    new.driving = state.driving + inc
    new.common_time = state.common_time + dt
    new.per_curve_capacity = state.per_curve_capacity + a * dt
    new.log_cap = state.log_cap + float(np.sum(a * dt))
    _check_gaps(new.driving, new.common_time)
    return new


def schwarzian_n(jet) -> float:
    """N = -S/3 + (1 - h1^2)/6 for a jet (h, h1, h2, h3)."""
    j = jet if isinstance(jet, DerivativeJet) else DerivativeJet.from_array(jet)
    return -j.schwarzian / 3.0 + (1.0 - j.h1 * j.h1) / 6.0


def accumulate_m(state: MultiSlitState, tip_jets: Sequence[DerivativeJet], dt_j) -> float:
    """m_acc advanced by sum_j N^j dt_j (left-point rule)."""
    total = state.m_acc
    for jet, d in zip(tip_jets, np.atleast_1d(dt_j)):
        vals = (jet.h, jet.h1, jet.h2, jet.h3)
        if not all(math.isfinite(v) for v in vals):
            raise NumericError("non-finite tip jet")
        if not (0.0 < jet.h1 <= 1.0 + 1e-9):
            raise NumericError(f"tip derivative {jet.h1} outside (0, 1]")
        total += schwarzian_n(jet) * float(d)
    return total


def tip_jet_estimate(state: MultiSlitState, j: int, fd_step: float | None = None) -> DerivativeJet:
    """Jet of h_{t,j} at the tip of curve j by finite differences.

    Only available while curve j has not grown itself (h^j = id), in which
    case h_{t,j} = h_t near theta^j and the stencil kept by new_state is used.
    """
    s = state.fd_step if fd_step is None else float(fd_step)
    if abs(s - state.fd_step) > 1e-15:
        raise StencilError(f"stencil was registered with step {state.fd_step}, not {s}")
    if state.per_curve_capacity[j] > 0:
        raise StencilError(f"curve {j} has grown; its own chart is not tracked by the stencil")
    th = state.initial[j]
    sel = state.stencil_owner == j
    if sel.sum() != len(_STENCIL) + 1:
        raise StencilError(f"stencil of curve {j} is incomplete")
    offs = np.rint((state.spectator_angles[sel] - th) / s).astype(int)
    f = dict(zip(offs.tolist(), state.spectator_jets[sel, 0].tolist()))

    def d123(u):
        d1 = (f[u] - f[-u]) / (2 * u * s)
        d2 = (f[u] - 2 * f[0] + f[-u]) / (u * s) ** 2
        d3 = (f[2 * u] - 2 * f[u] + 2 * f[-u] - f[-2 * u]) / (2 * (u * s) ** 3)
        return np.array([d1, d2, d3])

    fine, coarse = d123(1), d123(2)
    d = (4 * fine - coarse) / 3
    if not np.all(np.isfinite(d)) or d[0] <= 0:
        raise StencilError("finite differences left the monotone range")
    return DerivativeJet(f[0], float(d[0]), float(d[1]), float(d[2]))


# ---------------------------------------------------------------- tracing


@dataclass
class CurveTrace:
    times: list = field(default_factory=list)
    points: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.points)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["curve_index", "time", "re", "im"])
            for j, (ts, zs) in enumerate(zip(self.times, self.points)):
                for t, z in zip(ts, zs):
                    w.writerow([j, repr(float(t)), repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path) -> "CurveTrace":
        rows = {}
        with open(path) as fh:
            for r in csv.DictReader(fh):
                rows.setdefault(int(r["curve_index"]), []).append(
                    (float(r["time"]), complex(float(r["re"]), float(r["im"])))
                )
        tr = cls()
        for j in sorted(rows):
            tr.times.append(np.array([t for t, _ in rows[j]]))
            tr.points.append(np.array([z for _, z in rows[j]]))
        return tr


def trace_single(xi, dt: float, stride: int = 1, stop_radius: float = 0.0):
    """Tip positions of a single radial curve with left-point frozen driving.

    Returns (times, points) with points[0] = e^{i xi_0}; stops early once a
    tip is within ``stop_radius`` of 0.
    """
    xi = np.ascontiguousarray(xi, dtype=float)
    n = xi.size - 1
    out = np.empty((n // stride + 1, 2))
    cnt = kernels.zipper_tips(xi, float(dt), int(stride), float(stop_radius), out)
    pts = out[:cnt, 0] + 1j * out[:cnt, 1]
    if np.any(np.abs(pts) > 1 + 1e-9) or not np.all(np.isfinite(pts)):
        raise NumericError("reverse flow left the disc")
    return np.arange(cnt) * stride * dt, pts


def trace_curves(record, stride: int = 16, coarsen: int = 1) -> CurveTrace:
    """Tips of every curve of a DrivingRecord.

    Single-curve records trace xi; multiradial records interleave the p
    drivings (each slit of capacity dt in the joint chart, rates 1).
    ``coarsen`` subsamples the driving before tracing to bound the O(n^2) cost.
    """
    dt = record.dt * coarsen
    tr = CurveTrace()
    omegas = getattr(record, "omegas", None)
    if omegas is None or len(omegas) == 0:
        xi = np.asarray(record.xi)[::coarsen]
        t, z = trace_single(xi, dt, stride)
        tr.times.append(t)
        tr.points.append(z)
        return tr
    om = np.asarray(omegas)[:, ::coarsen]
    p, m = om.shape
    seq = np.ascontiguousarray(om[:, :-1].T.reshape(-1).tolist() + om[:, -1].tolist())
    out = np.empty((seq.size, 2))
    cnt = kernels.zipper_tips(seq, dt, 1, 0.0, out)
    pts = out[:cnt, 0] + 1j * out[:cnt, 1]
    if np.any(np.abs(pts) > 1 + 1e-9):
        raise NumericError("reverse flow left the disc")
    # slit number s (1-based) belongs to curve (s - 1) % p and ends at step (s - 1) // p + 1
    for j in range(p):
        idx = np.arange(j + 1, (m - 1) * p + 1, p)
        idx = idx[:: max(stride, 1)]
        ts = np.r_[0.0, ((idx - 1) // p + 1) * dt]
        zs = np.r_[np.exp(1j * om[j, 0]), pts[idx]]
        tr.times.append(ts)
        tr.points.append(zs)
    return tr


def common_to_multi_time(t_grid, tip_h1) -> np.ndarray:
    """Cumulative own capacities t_j(t) = int_0^t ds / h1_tip(s)^2 (trapezoid)."""
    t = np.asarray(t_grid, dtype=float)
    h = np.asarray(tip_h1, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if np.any(h <= 0) or np.any(h > 1 + 1e-9):
        raise NumericError("tip derivative outside (0, 1]")
    rate = 1.0 / h**2
    out = np.zeros_like(rate)
    out[1:] = np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t)[:, None], axis=0)
    return out


# ---------------------------------------------------------------- two-curve lattice


@dataclass(frozen=True)
class LatticeSummary:
    """End state of one two-curve lattice run.

    jet1 is the chart of curve 2 seen at xi^1 (that is h_{t,1} at the tip of
    curve 1), jet2 symmetrically; force is the image of theta^2 in the own
    chart of curve 1.
    """

    status: int
    t1: float
    t2: float
    log_cap: float
    m: float
    xi1: float
    xi2: float
    jet1: DerivativeJet
    jet2: DerivativeJet
    force: float
    running_max: float
    n_common: int

    @property
    def omega(self) -> tuple:
        return (self.jet1.h, self.jet2.h)


def run_lattice(bitgen, kappa: float, mu: float, theta, mode: int = 0, schedule=(), delta: float = 1e-3,
                dt: float = 2e-3, t_own: float = 0.0, history: int = 0, gap_factor: float = 10.0,
                dt_min: float = 1e-9, max_steps: int | None = None):
    """Grow two curves on the commuting-chain lattice.

    mode 0 grows independent radial SLE_kappa curves by the staircase
    ``schedule`` of (curve, capacity) bursts in steps of at most ``delta``.  mode 1
    runs the multiradial drift in common time until curve 1 reaches own
    capacity ``t_own``; mode 2 runs it in own time, always stepping the curve
    that is behind (steps shrink near small gaps and shielded tips).  A run
    needing more than ``max_steps`` steps per curve ends with status
    BAD_INPUT.  Returns (LatticeSummary, history array).
    """
    th1, th2 = float(theta[0]), float(theta[1])
    if not th1 < th2 < th1 + TWO_PI:
        raise DomainError("angles are not ordered on the torus")
    curves = np.array([c for c, _ in schedule], dtype=np.int_)
    steps = np.array([int(round(cap / delta)) for _, cap in schedule], dtype=np.int_)
    if mode not in (0, 1, 2):
        raise DomainError(f"unknown lattice mode {mode}")
    if mode == 0:
        # steps shrink near small gaps and jet scales, so allow refinement headroom
        n1 = n2 = max_steps if max_steps is not None else 64 * int(steps.sum()) + 16
    else:
        n1 = n2 = max_steps if max_steps is not None else 64 * int(math.ceil(t_own / dt)) + 16
    hist = np.zeros((history, 4))
    s = np.zeros(18)
    st = kernels.lattice_path(bitgen, float(kappa), float(mu), th1, th2, int(mode), curves, steps,
                              float(delta), float(dt), float(t_own), float(gap_factor), float(dt_min),
                              n1, n2, s, hist)
    summ = LatticeSummary(
        status=int(st), t1=s[1], t2=s[2], log_cap=s[3], m=s[4], xi1=s[5], xi2=s[6],
        jet1=DerivativeJet.from_array(s[7:11]), jet2=DerivativeJet.from_array(s[11:15]),
        force=s[15], running_max=s[16], n_common=int(s[17]),
    )
    return summ, hist[: min(history, summ.n_common)]
