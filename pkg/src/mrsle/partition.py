"""Partition functions, exponents and constants.

Every evaluator returns a :class:`PartitionValue` carrying ``log|Z|``, the
phase and the gradient of ``log Z`` in the angle variables, so the drifts used
by the samplers are read directly off ``grad``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, gammasgn

from .conformal import mobius_to_origin, wrap_angle
from .errors import AccuracyError, BranchError, DomainError, PoleError, StencilError

__all__ = [
    "UniversalExponents",
    "PartitionValue",
    "exponents",
    "z_multiradial",
    "z_multiradial_at",
    "z_radial_rho",
    "z_fusion",
    "z_shuffle_h",
    "z_fusion_h",
    "z_fusion_from_h",
    "q_integer",
    "q_factorial",
    "selberg_constant",
    "fusion_constant",
    "fusion_constant_gauss",
    "bpz_residual",
    "chordal_bpz_residual",
    "rainbow_numeric",
    "rainbow_ratio_r",
]


@dataclass(frozen=True)
class UniversalExponents:
    kappa: float
    b: float
    b_tilde: float
    c: float
    e0: float

    def h(self, n: int) -> float:
        return n * (n + 2) / self.kappa - n / 2


def exponents(kappa: float) -> UniversalExponents:
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    k = float(kappa)
    return UniversalExponents(
        kappa=k,
        b=(6 - k) / (2 * k),
        b_tilde=(6 - k) * (k - 2) / (8 * k),
        c=(6 - k) * (3 * k - 8) / (2 * k),
        e0=(k - 4) / (4 * math.sqrt(k)),
    )


@dataclass
class PartitionValue:
    log_abs: float
    phase: float = 0.0
    grad: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def value(self) -> complex | float:
        v = math.exp(self.log_abs)
        return v if self.phase == 0.0 else v * cmath.exp(1j * self.phase)

    def to_dict(self) -> dict:
        return {"log_abs": self.log_abs, "phase": self.phase, "grad": [float(g) for g in self.grad]}


def _angles(angles: Sequence[float]) -> np.ndarray:
    th = np.asarray(angles, dtype=float).ravel()
    if th.size and not np.all(np.isfinite(th)):
        raise DomainError("non-finite angle")
    return th


def _half_sines(th: np.ndarray) -> np.ndarray:
    """|sin((th_j - th_i)/2)| for all pairs, with the diagonal set to 1."""
    d = wrap_angle(th[None, :] - th[:, None])
    s = np.abs(np.sin(d / 2))
    np.fill_diagonal(s, 1.0)
    if np.any(s == 0.0):
        raise DomainError("coincident marked points")
    return s


def _pair_cot(th: np.ndarray) -> np.ndarray:
    """cot((th_j - th_i)/2) at [i, j]; zero on the diagonal."""
    d = th[None, :] - th[:, None]
    with np.errstate(divide="ignore"):
        c = np.cos(d / 2) / np.sin(d / 2)
    np.fill_diagonal(c, 0.0)
    return c


def z_multiradial(kappa: float, mu: float, angles: Sequence[float]) -> PartitionValue:
    """p-radial partition function with spiral, in the disc with target 0."""
    th = _angles(angles)
    s = _half_sines(th)
    iu = np.triu_indices(th.size, 1)
    log_abs = (2 / kappa) * float(np.sum(np.log(2 * s[iu]))) + (mu / kappa) * float(th.sum())
    # d/dth_j of (2/k) log|sin((th_j - th_i)/2)| is (1/k) cot((th_j - th_i)/2)
    grad = _pair_cot(th).sum(axis=0) / kappa + mu / kappa
    return PartitionValue(log_abs, 0.0, grad)


def z_multiradial_at(kappa: float, angles: Sequence[float], z: complex) -> PartitionValue:
    """mu = 0 partition function with a general interior point, by covariance.

    The gradient is taken in the original boundary angles.
    """
    th = _angles(angles)
    p = th.size
    ex = exponents(kappa)
    phi = mobius_to_origin(z)
    mapped = phi.angle(th)
    dphi = phi.angle_deriv(th)
    inner = z_multiradial(kappa, 0.0, mapped)
    log_abs = (
        (ex.b_tilde + (p * p - 1) / (2 * kappa)) * math.log(abs(phi.deriv(z)))
        + ex.b * float(np.sum(np.log(dphi)))
        + inner.log_abs
    )
    # d/dth log|phi'(e^{ith})| = Re(i e^{ith} phi''/phi') = Re(2 i conj(z) e^{ith} / (1 - conj(z) e^{ith}))
    e = np.exp(1j * th)
    dlog = np.real(2j * np.conj(z) * e / (1 - np.conj(z) * e))
    grad = ex.b * dlog + inner.grad * dphi
    return PartitionValue(log_abs, 0.0, grad)


def z_radial_rho(kappa: float, mu: float, rho: Sequence[float], angles: Sequence[float]) -> PartitionValue:
    """Partition function of radial SLE_kappa^mu(rho); rho has length p - 1."""
    th = _angles(angles)
    rho = np.asarray(rho, dtype=float).ravel()
    if rho.size != th.size - 1:
        raise DomainError(f"need {th.size - 1} weights, got {rho.size}")
    w = np.concatenate([[2.0], rho])
    s = _half_sines(th)
    e = np.outer(w, w) / (2 * kappa)
    iu = np.triu_indices(th.size, 1)
    log_abs = float(np.sum(e[iu] * np.log(2 * s[iu]))) + (mu / kappa) * float(np.sum(w / 2 * th))
    c = _pair_cot(th)
    np.fill_diagonal(e, 0.0)
    grad = 0.5 * (e * c).sum(axis=0) + mu / kappa * w / 2
    return PartitionValue(log_abs, 0.0, grad)


def z_fusion(kappa: float, angles: Sequence[float], target: float) -> PartitionValue:
    """Half-watermelon partition function in the disc; grad lists starts then target."""
    th = _angles(angles)
    n = th.size
    allp = np.concatenate([th, [float(target)]])
    s = _half_sines(allp)
    c = _pair_cot(allp)
    iu = np.triu_indices(n, 1)
    a = 1 - (2 / kappa) * (n + 2)
    log_abs = (2 / kappa) * float(np.sum(np.log(2 * s[:n, :n][iu]))) + a * float(np.sum(np.log(2 * s[:n, n])))
    e = np.full((n + 1, n + 1), 2 / kappa)
    e[:n, n] = e[n, :n] = a
    np.fill_diagonal(e, 0.0)
    grad = (e * c).sum(axis=0) / 2
    return PartitionValue(log_abs, 0.0, grad)


def z_shuffle_h(kappa: float, points: Sequence[float]) -> float:
    """Product form prod_{i<j} |x^j - x^i|^{2/kappa} (returned as a log)."""
    x = np.sort(np.asarray(points, dtype=float))
    iu = np.triu_indices(x.size, 1)
    d = x[None, :] - x[:, None]
    return (2 / kappa) * float(np.sum(np.log(d[iu])))


def z_fusion_h(kappa: float, starts: Sequence[float], target: float) -> float:
    """log of the half-plane half-watermelon partition function (target y > all starts)."""
    x = np.asarray(starts, dtype=float)
    if not np.all(target > x):
        raise DomainError("target must lie to the right of all starts")
    return z_shuffle_h(kappa, x) + (1 - (2 / kappa) * (x.size + 2)) * float(np.sum(np.log(target - x)))


def z_fusion_from_h(kappa: float, angles: Sequence[float], target: float) -> float:
    """log Z_fusion in the disc, transported from half-plane coordinates.

    The Cayley-type map psi(w) = i (1 + w') / (1 - w') with w' = w e^{-i a} sends
    e^{ia} to infinity; the starts and target land on the real line and the
    covariance factors |psi'|^b, |psi'|^{h_n} are applied.
    """
    th = _angles(angles)
    n = th.size
    ex = exponents(kappa)
    allp = np.concatenate([th, [float(target)]])
    # put the pole of the Cayley map in the arc after the target, away from all points
    a = float(target) + 0.5 * (min(float(wrap_angle(t - target)) % (2 * math.pi) for t in th) or math.pi)
    u = np.exp(1j * (allp - a))
    real = np.real(1j * (1 + u) / (1 - u))
    deriv = np.abs(2j / (1 - u) ** 2)
    # order: starts must be increasing and the target to their right on the line
    xs, y = real[:n], real[n]
    if not np.all(xs < y):
        # the orientation of the map reverses the order; mirror the line
        xs, y = -xs, -y
    return (
        ex.b * float(np.sum(np.log(deriv[:n])))
        + ex.h(n) * math.log(deriv[n])
        + z_fusion_h(kappa, xs, y)
    )


# ---------------------------------------------------------------- constants


def q_integer(m: int, kappa: float) -> float:
    den = math.sin(4 * math.pi / kappa)
    if abs(den) < 1e-14:
        raise PoleError(f"q-integer denominator vanishes at kappa={kappa}")
    return math.sin(4 * math.pi * m / kappa) / den


def q_factorial(n: int, kappa: float) -> float:
    out = 1.0
    for m in range(1, n + 1):
        out *= q_integer(m, kappa)
    return out


def _slog_gamma(x: float) -> tuple[float, float]:
    """(sign, log|Gamma(x)|) with poles reported."""
    if x <= 0 and abs(x - round(x)) < 1e-12:
        raise PoleError(f"Gamma pole at argument {x}")
    return float(gammasgn(x)), float(gammaln(x))


def _log_gamma_ratio(num: Sequence[float], den: Sequence[float]) -> tuple[float, float]:
    sign, lg = 1.0, 0.0
    for x in num:
        s, v = _slog_gamma(x)
        sign *= s
        lg += v
    for x in den:
        s, v = _slog_gamma(x)
        sign *= s
        lg -= v
    return sign, lg


def selberg_constant(n: int, kappa: float) -> float:
    a = 4 / kappa
    num, den = [], []
    for u in range(1, n + 1):
        num += [1 - a * (n + 1 - u), 1 - a * (n + 1 - u), 1 + a * u]
        den += [1 + a, 2 - a * (n + 2 - u)]
    sign, lg = _log_gamma_ratio(num, den)
    return sign * math.exp(lg - math.lgamma(n + 1))


def _inv_s1(kappa: float) -> float:
    sign, lg = _log_gamma_ratio([2 - 8 / kappa], [1 - 4 / kappa, 1 - 4 / kappa])
    return sign * math.exp(lg)


def _fusion_constant_direct(n: int, kappa: float) -> float:
    qn = q_integer(n + 1, kappa)
    if abs(qn) < 1e-12:
        raise PoleError(f"[{n + 1}]_q vanishes at kappa={kappa}")
    return q_integer(2, kappa) ** n * q_factorial(n, kappa) / qn * _inv_s1(kappa) ** n * selberg_constant(n, kappa)


def fusion_constant(n: int, kappa: float) -> float:
    """A_n; finite on (0, 8), where isolated 0/0 points are resolved as limits.

    At such points (e.g. n = 2, kappa = 6, where [3]_q and 1/Gamma(0) vanish
    together) the value is the symmetric Richardson limit of the formula at
    kappa +- d, accurate to O(d^4).
    """
    try:
        return _fusion_constant_direct(n, kappa)
    except PoleError:
        if not 0 < kappa < 8:
            raise
    d = 1e-3
    f1 = 0.5 * (_fusion_constant_direct(n, kappa + d) + _fusion_constant_direct(n, kappa - d))
    f2 = 0.5 * (_fusion_constant_direct(n, kappa + d / 2) + _fusion_constant_direct(n, kappa - d / 2))
    return (4 * f2 - f1) / 3


def fusion_constant_gauss(kappa: float) -> float:
    """A_2 as 1 / 2F1(4/k, 1-4/k; 8/k; 1) with the Gauss summation formula."""
    sign, lg = _log_gamma_ratio([4 / kappa, 12 / kappa - 1], [8 / kappa, 8 / kappa - 1])
    return sign * math.exp(lg)


# ---------------------------------------------------------------- BPZ checks


def bpz_residual(
    Z: Callable[[np.ndarray], PartitionValue],
    angles: Sequence[float],
    j: int,
    target_constant: float,
    kappa: float,
    weights: Sequence[float] | None = None,
    step: float = 1e-5,
) -> float:
    """Residual of the radial BPZ equation in slot j.

    ``weights[i]`` is the boundary weight of point i entering through
    -(w_i/2)/sin^2((th_i - th_j)/2); it defaults to b for every point.
    The second derivative is a central difference of the analytic gradient.
    """
    th = _angles(angles)
    b = exponents(kappa).b
    w = np.full(th.size, b) if weights is None else np.asarray(weights, dtype=float)
    gaps = np.abs(np.sin(wrap_angle(np.delete(th, j) - th[j]) / 2))
    if gaps.size and gaps.min() < 20 * step:
        raise StencilError("configuration too close to a collision for the stencil")
    g0 = Z(th).grad
    tp, tm = th.copy(), th.copy()
    tp[j] += step
    tm[j] -= step
    dgj = (Z(tp).grad[j] - Z(tm).grad[j]) / (2 * step)
    res = (kappa / 2) * (dgj + g0[j] ** 2)
    for i in range(th.size):
        if i == j:
            continue
        d = (th[i] - th[j]) / 2
        res += math.cos(d) / math.sin(d) * g0[i] - (w[i] / 2) / math.sin(d) ** 2
    return res - target_constant


_FD7 = {
    1: (np.array([-3, -2, -1, 1, 2, 3]), np.array([-1, 9, -45, 45, -9, 1]) / 60.0),
    2: (np.array([-3, -2, -1, 0, 1, 2, 3]), np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0),
}


def chordal_bpz_residual(
    F: Callable[[np.ndarray], float], u: Sequence[float], j: int, kappa: float, step: float = 0.05
) -> float:
    """Relative residual of the chordal BPZ equation in slot j, by 7-point stencils."""
    u = np.asarray(u, dtype=float)
    b = exponents(kappa).b
    f0 = F(u)

    def deriv(i, order):
        offs, coef = _FD7[order]
        acc = 0.0
        for o, c in zip(offs, coef):
            if o == 0:
                acc += c * f0
                continue
            v = u.copy()
            v[i] += o * step
            acc += c * F(v)
        return acc / step**order

    res = (kappa / 2) * deriv(j, 2)
    for i in range(u.size):
        if i == j:
            continue
        res += 2 * deriv(i, 1) / (u[i] - u[j]) - 2 * b * f0 / (u[i] - u[j]) ** 2
    return res / f0


# ---------------------------------------------------------------- rainbow integrals


def _split_near(a: complex, b: complex, br: list, sing: np.ndarray) -> list:
    """Refine breakpoints so every panel is no longer than its distance to a singular point."""
    out = [br[0]]
    stack = list(zip(br[:-1], br[1:]))[::-1]
    while stack:
        u0, u1 = stack.pop()
        p0, p1 = a + (b - a) * u0, a + (b - a) * u1
        length = abs(p1 - p0)
        if sing.size:
            # distance from the singular points to the panel (a segment)
            d = p1 - p0
            t = np.clip(np.real((sing - p0) * np.conj(d)) / (length**2), 0, 1)
            dist = float(np.min(np.abs(sing - (p0 + t * d))))
        else:
            dist = np.inf
        if length > 1.5 * dist and length > 1e-12:
            um = 0.5 * (u0 + u1)
            stack.append((um, u1))
            stack.append((u0, um))
        else:
            out.append(u1)
    return out


class _Loop:
    """Polygonal integration loop based at x0 with its anchor vertex.

    The first and last edges (those touching the base point, where nested loops
    meet) are split geometrically so that the corner singularity of the
    screening interaction is resolved.
    """

    def __init__(self, verts: Sequence[complex], anchor: int, ngl: int, sing=(), grading: int = 20):
        self.verts = np.asarray(verts, dtype=complex)
        xg, wg = np.polynomial.legendre.leggauss(ngl)
        nseg = len(self.verts) - 1
        sing = np.asarray(sing, dtype=float)
        w, dw, seg = [], [], []
        for k in range(nseg):
            a, b = self.verts[k], self.verts[k + 1]
            if k == 0:
                br = [0.0] + [2.0 ** (-i) for i in range(grading, 0, -1)] + [1.0]
            elif k == nseg - 1:
                br = [0.0] + [1 - 2.0 ** (-i) for i in range(1, grading + 1)] + [1.0]
            else:
                br = [0.0, 1.0]
            br = _split_near(a, b, br, sing)
            for u0, u1 in zip(br[:-1], br[1:]):
                u = u0 + (u1 - u0) * (xg + 1) / 2
                w.append(a + (b - a) * u)
                dw.append((b - a) * (u1 - u0) / 2 * wg)
                seg.append(np.full(ngl, k))
        # the anchor (a vertex on the real line) rides along with zero weight
        w.append([self.verts[anchor]])
        dw.append([0.0])
        seg.append([anchor])
        self.w = np.concatenate(w)
        self.dw = np.concatenate(dw)
        self.seg = np.concatenate(seg).astype(int)
        self.ia = self.w.size - 1

    def arg_from(self, p) -> np.ndarray:
        """Continuous arg(w - p) along the loop for fixed p (scalar or column of points).

        The increment along a straight edge that avoids p is the principal
        angle of the ratio of endpoint differences, so the continuation is exact.
        """
        p = np.asarray(p)
        col = p.ndim > 0
        P = p[:, None] if col else p
        va = self.verts[None, :] - P if col else self.verts - P
        va = np.atleast_2d(va)
        start = np.where(np.abs(va[:, 0]) == 0, np.angle(va[:, 1]), np.angle(va[:, 0]))
        with np.errstate(divide="ignore", invalid="ignore"):
            inc = np.angle(va[:, 1:] / va[:, :-1])
        inc[~np.isfinite(inc)] = 0.0
        inc[np.abs(va[:, :-1]) == 0] = 0.0
        argv = np.concatenate([start[:, None], start[:, None] + np.cumsum(inc, axis=1)], axis=1)
        W = np.atleast_2d(self.w)
        Pb = P if col else np.full((1, 1), p)
        a = self.verts[self.seg][None, :]
        b = self.verts[self.seg + 1][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            d_a = np.angle((W - Pb) / (a - Pb))
            d_b = -np.angle((b - Pb) / (W - Pb))
        at_start = (a - Pb) == 0
        out = np.where(at_start, argv[:, self.seg + 1] + d_b, argv[:, self.seg] + d_a)
        return out if col else out[0]


def _rainbow_loops(n: int, L: int, xs, ys, x0: float, ngl: int):
    """Loops for the L-th term: n - L loops around the starts, L hooks around the ends.

    Loops around the starts are counterclockwise and cross the gap between the
    clusters; hooks leave the base point below the starts, wind counterclockwise
    around the ends (crossing to the right of the outermost end) and come back
    through the gap.  Inside each cluster the loop of the lower-index variable
    is nested inside the others, matching the ordering of the anchor points.
    """
    x1, xn = xs[0], xs[-1]
    yn, y1 = ys[-1], ys[0]
    g = yn - xn
    sx = min([g] + [xs[i + 1] - xs[i] for i in range(n - 1)])
    sy = min([g] + [ys[i] - ys[i + 1] for i in range(n - 1)])
    a = x1 - min(0.3 * sx, 0.5 * (x1 - x0))
    sing = list(xs) + list(ys)
    loops = []
    nx = n - L
    for k in range(nx):
        c = xn + g * (0.2 + 0.15 * k)
        D = sx * (0.3 + 0.2 * k)
        loops.append(_Loop([x0, a - 1j * D, c - 1j * D, c, c + 1j * D, a + 1j * D, x0], 3, ngl, sing))
    depth_x = sx * (0.3 + 0.2 * max(nx - 1, 0))
    for k in range(L):
        r = y1 + sy * (0.3 + 0.2 * k)
        m = xn + g * (0.8 - 0.2 * k)
        T = sy * (0.3 + 0.2 * k)
        e_in = depth_x + sx * (0.6 - 0.2 * k)
        e_out = depth_x + sx * (0.8 + 0.2 * k)
        loops.append(
            _Loop(
                [x0, a - 1j * e_out, r - 1j * e_out, r, r + 1j * T, m + 1j * T, m, m - 1j * e_in, a - 1j * e_in, x0],
                3,
                ngl,
                sing,
            )
        )
    return loops


def _loop_integral(loops, xs, ys, kappa: float) -> complex:
    """Integral of the screening integrand over the product of loops.

    The branch is the continuous one on the product of open loops, normalised
    to be real and positive when every variable sits at its anchor.
    """
    n = len(loops)
    e1, e2 = -4 / kappa, 8 / kappa
    sing = list(xs) + list(ys)
    single_abs, single_arg = [], []
    for L in loops:
        la = np.zeros(L.w.size)
        ar = np.zeros(L.w.size)
        for p in sing:
            la += e1 * np.log(np.abs(L.w - p))
            ar += e1 * L.arg_from(p)
        single_abs.append(la)
        single_arg.append(ar)
    if n == 1:
        L = loops[0]
        ph = single_arg[0] - single_arg[0][L.ia]
        return complex(np.sum(np.exp(single_abs[0] + 1j * ph) * L.dw))
    A, B = loops
    # arg(w^2 - w^1): arg(x0 - w^1) continued along A, then along B for fixed w^1
    base = A.arg_from(B.verts[0]) + math.pi
    total = 0j
    anchor_phase = None
    ja = B.ia
    rows = np.arange(A.w.size)
    for chunk in np.array_split(rows, max(1, A.w.size // 256)):
        P = A.w[chunk]
        arg = B.arg_from(P) - np.angle(B.verts[0] - P)[:, None] + base[chunk][:, None]
        if A.ia in chunk:
            r = int(np.nonzero(chunk == A.ia)[0][0])
            anchor_phase = single_arg[0][A.ia] + single_arg[1][ja] + e2 * arg[r, ja]
        la = single_abs[0][chunk][:, None] + single_abs[1][None, :] + e2 * np.log(np.abs(B.w[None, :] - P[:, None]))
        ph = single_arg[0][chunk][:, None] + single_arg[1][None, :] + e2 * arg
        total += (A.dw[chunk][:, None] * np.exp(la + 1j * ph) * B.dw[None, :]).sum()
    # phase is global: rotate once the anchor value is known
    return complex(total * cmath.exp(-1j * anchor_phase))


def _rainbow_once(n, kappa, xs, ys, x0, ngl) -> complex:
    q = cmath.exp(4j * math.pi / kappa)
    acc = 0j
    for L in range(n + 1):
        I = _loop_integral(_rainbow_loops(n, L, xs, ys, x0, ngl), xs, ys, kappa)
        acc += (-1) ** L * q ** (L * (n - L - 1)) * I
    qf = q_factorial(n + 1, kappa)
    if abs(qf) < 1e-12:
        raise PoleError(f"[{n + 1}]_q! vanishes at kappa={kappa}")
    C = q_integer(2, kappa) ** n / ((q**-2 - 1) ** n * qf) * _inv_s1(kappa) ** n
    pref = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            pref += math.log(xs[j] - xs[i]) + math.log(ys[i] - ys[j])
        for j in range(n):
            pref += math.log(ys[j] - xs[i])
    return C * math.exp((2 / kappa) * pref) * acc


def rainbow_numeric(
    n: int,
    kappa: float,
    starts: Sequence[float],
    ends: Sequence[float],
    x0: float | None = None,
    tol: float = 1e-8,
    ngl: int | None = None,
    max_ngl: int = 64,
) -> PartitionValue:
    """Rainbow partition function in the upper half-plane by contour quadrature.

    ``starts`` = (x^1, ..., x^n) increasing and ``ends`` = (y^1, ..., y^n) with
    x^1 < ... < x^n < y^n < ... < y^1.  The Gauss-Legendre order per edge is
    raised by factors of about 4/3 until two successive values agree to ``tol``
    (or fixed when ``ngl`` is given).
    """
    if n not in (1, 2):
        raise DomainError("rainbow_numeric supports n = 1, 2")
    if not 4 < kappa < 8:
        raise DomainError("rainbow_numeric needs kappa in (4, 8)")
    xs = [float(v) for v in starts]
    ys = [float(v) for v in ends]
    if len(xs) != n or len(ys) != n:
        raise DomainError("need n starts and n ends")
    chain = xs + ys[::-1]
    if any(b <= a for a, b in zip(chain[:-1], chain[1:])):
        raise DomainError("points must satisfy x^1 < ... < x^n < y^n < ... < y^1")
    if x0 is None:
        x0 = xs[0] - max(0.5 * (ys[0] - xs[0]), 0.5)
    if not x0 < xs[0]:
        raise DomainError("auxiliary point x0 must lie left of x^1")
    if ngl is not None:
        val = _rainbow_once(n, kappa, xs, ys, x0, ngl)
    else:
        order = 16
        prev = _rainbow_once(n, kappa, xs, ys, x0, order)
        while True:
            order = int(round(order * 4 / 3))
            if order > max_ngl:
                raise AccuracyError(f"rainbow quadrature did not reach tol={tol}")
            val = _rainbow_once(n, kappa, xs, ys, x0, order)
            if abs(val - prev) <= tol * abs(val):
                break
            prev = val
    if abs(val.imag) > 1e-6 * abs(val):
        raise BranchError(f"imaginary residue {val.imag:.3e} for value {val.real:.6e}")
    if val.real <= 0:
        raise BranchError(f"non-positive rainbow value {val.real}")
    return PartitionValue(math.log(val.real), 0.0, np.zeros(0))


def rainbow_ratio_r(kappa: float, xs: Sequence[float], ys: Sequence[float], **kw) -> float:
    """Ratio (prod y^j)^{(2/k)(n+2)-1} Z_rainbow / (Z_shuffle(x) Z_shuffle(y)) in H with 0, infinity marked."""
    n = len(xs)
    lr = rainbow_numeric(n, kappa, xs, ys, **kw).log_abs
    ly = ((2 / kappa) * (n + 2) - 1) * float(np.sum(np.log(np.abs(ys))))
    return math.exp(lr + ly - z_shuffle_h(kappa, xs) - z_shuffle_h(kappa, ys))
