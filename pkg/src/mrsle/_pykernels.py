"""Pure-Python reference kernels.

This module mirrors ``_ckernels.pyx`` statement by statement: same operation
order, same libm calls, same consumption of the random stream.  The two
backends therefore agree bit for bit, which the test suite asserts.
"""
import math

import numpy as np

TWO_PI = 6.283185307179586
INV_2_53 = 1.0 / 9007199254740992.0

OK = 0
GAP_COLLAPSE = 1
SWALLOWED = 2
BAD_INPUT = 3


class NormalStream:
    """Standard normals from a numpy BitGenerator via the Box-Muller cosine branch."""

    def __init__(self, bitgen, chunk=4096):
        self.bitgen = bitgen
        self.chunk = chunk
        self.buf = []
        self.i = 0

    def raw(self):
        if self.i >= len(self.buf):
            self.buf = self.bitgen.random_raw(self.chunk).tolist()
            self.i = 0
        v = self.buf[self.i]
        self.i += 1
        return v

    def normal(self):
        u1 = 1.0 - (self.raw() >> 11) * INV_2_53
        u2 = (self.raw() >> 11) * INV_2_53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)


def _cot(x):
    return math.cos(x) / math.sin(x)


# ---------------------------------------------------------------- jet flows


def _jet_rhs(h, h1, h2, h3, drive, rate, p, out):
    v1 = 0.0
    v2 = 0.0
    v3 = 0.0
    v4 = 0.0
    for j in range(p):
        a = rate[j]
        if a == 0.0:
            continue
        c = _cot(0.5 * (h - drive[j]))
        f1 = -0.5 * (1.0 + c * c)
        f2 = -c * f1
        f3 = -0.25 * (1.0 + 3.0 * c * c) * (1.0 + c * c)
        v1 += a * c
        v2 += a * f1
        v3 += a * f2
        v4 += a * f3
    out[0] = v1
    out[1] = v2 * h1
    out[2] = v3 * h1 * h1 + v2 * h2
    out[3] = v4 * h1 * h1 * h1 + 3.0 * v3 * h1 * h2 + v2 * h3


def _min_sin(h, drive, rate, p):
    m = 2.0
    for j in range(p):
        if rate[j] != 0.0:
            s = abs(math.sin(0.5 * (h - drive[j])))
            if s < m:
                m = s
    return m


def jet_flow(jets, drive, rate, dt, substeps, tol):
    """RK4 flow of (h, h1, h2, h3) rows of ``jets`` under a superposed field.

    ``drive`` and ``rate`` have shape (m + 1, p); within step k both are
    interpolated linearly between rows k and k + 1.  Returns -1, or the first
    step index at which some point came within ``tol`` of a driving point.
    """
    n = jets.shape[0]
    m = drive.shape[0] - 1
    p = drive.shape[1]
    hs = dt / substeps
    d = [0.0] * p
    r = [0.0] * p
    k1 = [0.0] * 4
    k2 = [0.0] * 4
    k3 = [0.0] * 4
    k4 = [0.0] * 4
    for i in range(n):
        h = jets[i, 0]
        h1 = jets[i, 1]
        h2 = jets[i, 2]
        h3 = jets[i, 3]
        for k in range(m):
            for s in range(substeps):
                lam0 = s / substeps
                lamh = (s + 0.5) / substeps
                lam1 = (s + 1.0) / substeps
                for j in range(p):
                    d[j] = drive[k, j] + lam0 * (drive[k + 1, j] - drive[k, j])
                    r[j] = rate[k, j] + lam0 * (rate[k + 1, j] - rate[k, j])
                if _min_sin(h, d, r, p) < tol:
                    jets[i, 0] = h
                    jets[i, 1] = h1
                    jets[i, 2] = h2
                    jets[i, 3] = h3
                    return k
                _jet_rhs(h, h1, h2, h3, d, r, p, k1)
                for j in range(p):
                    d[j] = drive[k, j] + lamh * (drive[k + 1, j] - drive[k, j])
                    r[j] = rate[k, j] + lamh * (rate[k + 1, j] - rate[k, j])
                _jet_rhs(h + 0.5 * hs * k1[0], h1 + 0.5 * hs * k1[1], h2 + 0.5 * hs * k1[2], h3 + 0.5 * hs * k1[3], d, r, p, k2)
                _jet_rhs(h + 0.5 * hs * k2[0], h1 + 0.5 * hs * k2[1], h2 + 0.5 * hs * k2[2], h3 + 0.5 * hs * k2[3], d, r, p, k3)
                for j in range(p):
                    d[j] = drive[k, j] + lam1 * (drive[k + 1, j] - drive[k, j])
                    r[j] = rate[k, j] + lam1 * (rate[k + 1, j] - rate[k, j])
                _jet_rhs(h + hs * k3[0], h1 + hs * k3[1], h2 + hs * k3[2], h3 + hs * k3[3], d, r, p, k4)
                h = h + hs / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
                h1 = h1 + hs / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
                h2 = h2 + hs / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
                h3 = h3 + hs / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        jets[i, 0] = h
        jets[i, 1] = h1
        jets[i, 2] = h2
        jets[i, 3] = h3
    return -1


def _frozen_step(st, drive, a, D):
    """One frozen-driving step of a single jet st = [w, h1, h2, h3]; returns 0 or SWALLOWED."""
    u = st[0] - drive
    s0 = math.sin(0.5 * u)
    if abs(s0) < 1e-9 or st[1] < 1e-300:
        return SWALLOWED
    x = a * D / (s0 * s0 * 0.05)
    if x > 10000.0:
        x = 10000.0
    nsub = 1 + int(x)
    hs = D / nsub
    w = st[0]
    h1 = st[1]
    h2 = st[2]
    h3 = st[3]
    k1 = [0.0] * 4
    k2 = [0.0] * 4
    k3 = [0.0] * 4
    k4 = [0.0] * 4
    dd = [drive]
    aa = [a]
    for s in range(nsub):
        _jet_rhs(w, h1, h2, h3, dd, aa, 1, k1)
        _jet_rhs(w + 0.5 * hs * k1[0], h1 + 0.5 * hs * k1[1], h2 + 0.5 * hs * k1[2], h3 + 0.5 * hs * k1[3], dd, aa, 1, k2)
        _jet_rhs(w + 0.5 * hs * k2[0], h1 + 0.5 * hs * k2[1], h2 + 0.5 * hs * k2[2], h3 + 0.5 * hs * k2[3], dd, aa, 1, k3)
        _jet_rhs(w + hs * k3[0], h1 + hs * k3[1], h2 + hs * k3[2], h3 + hs * k3[3], dd, aa, 1, k4)
        w = w + hs / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        h1 = h1 + hs / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        h2 = h2 + hs / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        h3 = h3 + hs / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    s1 = math.sin(0.5 * (w - drive))
    if s0 * s1 <= 0.0 or abs(s1) < 1e-9 or not (h1 > 1e-300):
        return SWALLOWED
    st[0] = w
    st[1] = h1
    st[2] = h2
    st[3] = h3
    return OK


# ---------------------------------------------------------------- SLE_kappa^mu(rho) with force points


class _RhoState:
    pass


def _rho_gap(S):
    g = 10.0
    for j in range(S.q):
        t = S.v[j] - S.xi
        if t < g:
            g = t
        if TWO_PI - t < g:
            g = TWO_PI - t
    if S.couple != 0:
        if S.x < g:
            g = S.x
        if TWO_PI - S.x < g:
            g = TWO_PI - S.x
    return g


def _rho_euler(S, h, dW):
    drift = S.mu
    for j in range(S.q):
        th = S.v[j] - S.xi
        c = _cot(0.5 * th)
        drift -= 0.5 * S.rho[j] * c
        S.vnew[j] = S.v[j] + c * h
    if S.couple != 0:
        S.x = S.x - S.sk * dW + (S.alpha * _cot(0.5 * S.x) - S.mu) * h
    S.xi = S.xi + S.sk * dW + drift * h
    for j in range(S.q):
        S.v[j] = S.vnew[j]
    S.nsub += 1
    for j in range(S.q):
        th = S.v[j] - S.xi
        if not (th > 1e-9 and th < TWO_PI - 1e-9):
            return GAP_COLLAPSE
    if S.couple != 0:
        if not (S.x > 1e-9 and S.x < TWO_PI - 1e-9):
            return GAP_COLLAPSE
    return OK


def _rho_advance(S, h, dW):
    if _rho_gap(S) < S.gap_factor * math.sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = S.stream.normal()
        dW1 = 0.5 * dW + 0.5 * math.sqrt(h) * z
        st = _rho_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _rho_advance(S, 0.5 * h, dW - dW1)
    return _rho_euler(S, h, dW)


def rho_path(bitgen, kappa, mu, rho, xi0, v0, dt, steps, couple, alpha, x0, gap_factor, dt_min, out_xi, out_v, out_x):
    """Euler-Maruyama for (xi, V^2..V^p) and optionally a coupled Bessel X.

    ``couple`` = 0 runs the driving system only; otherwise X is driven by the
    same Brownian increments as -sqrt(kappa) dB.  Returns (status, substeps).
    """
    S = _RhoState()
    S.stream = NormalStream(bitgen)
    S.kappa = kappa
    S.sk = math.sqrt(kappa)
    S.mu = mu
    S.q = len(rho)
    S.rho = [float(r) for r in rho]
    S.v = [float(v) for v in v0]
    S.vnew = [0.0] * S.q
    S.xi = xi0
    S.couple = couple
    S.alpha = alpha
    S.x = x0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    sq = math.sqrt(dt)
    out_xi[0] = S.xi
    for j in range(S.q):
        out_v[j, 0] = S.v[j]
    if couple != 0:
        out_x[0] = S.x
    for k in range(steps):
        dW = sq * S.stream.normal()
        st = _rho_advance(S, dt, dW)
        if st != OK:
            for kk in range(k + 1, steps + 1):
                out_xi[kk] = math.nan
                for j in range(S.q):
                    out_v[j, kk] = math.nan
                if couple != 0:
                    out_x[kk] = math.nan
            return st, S.nsub
        out_xi[k + 1] = S.xi
        for j in range(S.q):
            out_v[j, k + 1] = S.v[j]
        if couple != 0:
            out_x[k + 1] = S.x
    return OK, S.nsub


# ---------------------------------------------------------------- radial Bessel process


class _BesState:
    pass


def _bes_advance(S, h, dW):
    g = S.x
    if TWO_PI - S.x < g:
        g = TWO_PI - S.x
    if g < S.gap_factor * math.sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = S.stream.normal()
        dW1 = 0.5 * dW + 0.5 * math.sqrt(h) * z
        st = _bes_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _bes_advance(S, 0.5 * h, dW - dW1)
    S.x = S.x - S.sk * dW + (S.alpha * _cot(0.5 * S.x) - S.mu) * h
    S.nsub += 1
    if S.x < S.xmin:
        S.xmin = S.x
    if S.x > S.xmax:
        S.xmax = S.x
    if not (S.x > 1e-9 and S.x < TWO_PI - 1e-9):
        return GAP_COLLAPSE
    return OK


def bessel_path(bitgen, kappa, alpha, mu, x0, dt, steps, gap_factor, dt_min, out, extrema):
    """Radial Bessel SDE; ``out`` may be empty; extrema[0:2] receive min and max over all substeps."""
    S = _BesState()
    S.stream = NormalStream(bitgen)
    S.kappa = kappa
    S.sk = math.sqrt(kappa)
    S.alpha = alpha
    S.mu = mu
    S.x = x0
    S.xmin = x0
    S.xmax = x0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    rec = out.shape[0] > 0
    sq = math.sqrt(dt)
    if rec:
        out[0] = x0
    st = OK
    for k in range(steps):
        dW = sq * S.stream.normal()
        st = _bes_advance(S, dt, dW)
        if st != OK:
            if rec:
                for kk in range(k + 1, steps + 1):
                    out[kk] = math.nan
            break
        if rec:
            out[k + 1] = S.x
    extrema[0] = S.xmin
    extrema[1] = S.xmax
    return st, S.nsub


# ---------------------------------------------------------------- single-curve slice with spectators


class _SliceState:
    pass


def _slice_advance(S, h, dW):
    g = 10.0
    for j in range(S.q):
        t = S.hh[j] - S.xi
        if t < g:
            g = t
        if TWO_PI - t < g:
            g = TWO_PI - t
    if g < S.gap_factor * math.sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = S.stream.normal()
        dW1 = 0.5 * dW + 0.5 * math.sqrt(h) * z
        st = _slice_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _slice_advance(S, 0.5 * h, dW - dW1)
    for j in range(S.q):
        s = math.sin(0.5 * (S.hh[j] - S.xi))
        c = math.cos(0.5 * (S.hh[j] - S.xi)) / s
        S.hh[j] = S.hh[j] + c * h
        S.lh[j] = S.lh[j] - 0.5 / (s * s) * h
    S.xi = S.xi + S.sk * dW
    S.nsub += 1
    for j in range(S.q):
        t = S.hh[j] - S.xi
        if not (t > 1e-9 and t < TWO_PI - 1e-9):
            return SWALLOWED
    return OK


def slice_path(bitgen, kappa, xi0, theta, dt, steps, gap_factor, dt_min, out):
    """Radial SLE_kappa from xi0 with spectator images h_t(theta^j) and log h_t'(theta^j).

    out receives [xi_T, h_T(theta^2..p), log h'_T(theta^2..p)].  Returns (status, substeps).
    """
    S = _SliceState()
    S.stream = NormalStream(bitgen)
    S.kappa = kappa
    S.sk = math.sqrt(kappa)
    S.q = len(theta)
    S.hh = [float(t) for t in theta]
    S.lh = [0.0] * S.q
    S.xi = xi0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    sq = math.sqrt(dt)
    st = OK
    for k in range(steps):
        dW = sq * S.stream.normal()
        st = _slice_advance(S, dt, dW)
        if st != OK:
            break
    out[0] = S.xi
    for j in range(S.q):
        out[1 + j] = S.hh[j]
        out[1 + S.q + j] = S.lh[j]
    return st, S.nsub


# ---------------------------------------------------------------- common-time multiradial driving


class _MultiState:
    pass


def _multi_gap(S):
    g = 10.0
    for j in range(S.p):
        if j + 1 < S.p:
            t = S.w[j + 1] - S.w[j]
        else:
            t = S.w[0] + TWO_PI - S.w[S.p - 1]
        if t < g:
            g = t
    return g


def _multi_advance(S, h, dW):
    if _multi_gap(S) < S.gap_factor * math.sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        dW1 = [0.0] * S.p
        dW2 = [0.0] * S.p
        sh = 0.5 * math.sqrt(h)
        for j in range(S.p):
            z = S.stream.normal()
            dW1[j] = 0.5 * dW[j] + sh * z
            dW2[j] = dW[j] - dW1[j]
        st = _multi_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _multi_advance(S, 0.5 * h, dW2)
    for j in range(S.p):
        drift = S.mu
        for i in range(S.p):
            if i != j:
                drift += 2.0 * _cot(0.5 * (S.w[j] - S.w[i]))
        S.wn[j] = S.w[j] + S.sk * dW[j] + drift * h
    for j in range(S.p):
        S.w[j] = S.wn[j]
    S.nsub += 1
    if _multi_gap(S) < 1e-9:
        return GAP_COLLAPSE
    return OK


def multiradial_path(bitgen, kappa, mu, omega0, dt, steps, gap_factor, dt_min, out):
    """Common-time joint-chart driving; out has shape (steps + 1, p)."""
    S = _MultiState()
    S.stream = NormalStream(bitgen)
    S.kappa = kappa
    S.sk = math.sqrt(kappa)
    S.mu = mu
    S.p = len(omega0)
    S.w = [float(v) for v in omega0]
    S.wn = [0.0] * S.p
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    sq = math.sqrt(dt)
    dW = [0.0] * S.p
    for j in range(S.p):
        out[0, j] = S.w[j]
    for k in range(steps):
        for j in range(S.p):
            dW[j] = sq * S.stream.normal()
        st = _multi_advance(S, dt, dW)
        if st != OK:
            for kk in range(k + 1, steps + 1):
                for j in range(S.p):
                    out[kk, j] = math.nan
            return st, S.nsub
        for j in range(S.p):
            out[k + 1, j] = S.w[j]
    return OK, S.nsub


# ---------------------------------------------------------------- zipper tracing


def _csqrt(a, b):
    m = math.sqrt(a * a + b * b)
    if a >= 0.0:
        t = math.sqrt(0.5 * (m + a))
        if t == 0.0:
            return 0.0, 0.0
        return t, b / (2.0 * t)
    t = math.sqrt(0.5 * (m - a))
    return abs(b) / (2.0 * t), math.copysign(t, b)


def _slit_inverse(wr, wi, cx, sx, ed):
    """Preimage of w under the frozen slit map of capacity d at angle (cx, sx) = e^{i xi}, ed = e^{-d}.

    Solves c z^2 + (2c - 1) z + c = 0 with c = ed * z_w / (1 + z_w)^2 and keeps the root in the disc.
    """
    zr = wr * cx + wi * sx
    zi = wi * cx - wr * sx
    pr = (1.0 + zr) * (1.0 + zr) - zi * zi
    pi_ = 2.0 * (1.0 + zr) * zi
    den = pr * pr + pi_ * pi_
    nr = ed * zr
    ni = ed * zi
    cr = (nr * pr + ni * pi_) / den
    ci = (ni * pr - nr * pi_) / den
    br = 2.0 * cr - 1.0
    bi = 2.0 * ci
    sr, si = _csqrt(1.0 - 4.0 * cr, -4.0 * ci)
    if br * sr + bi * si < 0.0:
        sr = -sr
        si = -si
    qr = -0.5 * (br + sr)
    qi = -0.5 * (bi + si)
    cc = cr * cr + ci * ci
    qq = qr * qr + qi * qi
    if qq <= cc:
        # q / c
        xr = (qr * cr + qi * ci) / cc
        xi_ = (qi * cr - qr * ci) / cc
    else:
        # c / q
        xr = (cr * qr + ci * qi) / qq
        xi_ = (ci * qr - cr * qi) / qq
    return xr * cx - xi_ * sx, xr * sx + xi_ * cx


def zipper_tips(xi, dt, stride, stop_radius, out):
    """Tips gamma(k * stride * dt) for the piecewise-constant (left-point) driving xi.

    out has shape (nmax, 2) and receives (re, im).  Tracing stops after the
    first output whose modulus is <= stop_radius.  Returns the count written.
    """
    n = xi.shape[0] - 1
    ed = math.exp(-dt)
    # tip radius r of a single slit of capacity dt: 4r/(1+r)^2 = e^{-dt}
    r0 = (2.0 - ed - 2.0 * math.sqrt(1.0 - ed)) / ed
    stop2 = stop_radius * stop_radius
    nout = out.shape[0]
    cs = [math.cos(x) for x in xi]
    sn = [math.sin(x) for x in xi]
    out[0, 0] = cs[0]
    out[0, 1] = sn[0]
    cnt = 1
    k = stride
    while k <= n and cnt < nout:
        wr = r0 * cs[k - 1]
        wi = r0 * sn[k - 1]
        for j in range(k - 1, 0, -1):
            wr, wi = _slit_inverse(wr, wi, cs[j - 1], sn[j - 1], ed)
        out[cnt, 0] = wr
        out[cnt, 1] = wi
        cnt += 1
        if wr * wr + wi * wi <= stop2:
            break
        k += stride
    return cnt


# ---------------------------------------------------------------- two-curve commuting lattice


def _ident(st, w):
    st[0] = w
    st[1] = 1.0
    st[2] = 0.0
    st[3] = 0.0


def _schwarz_n(st):
    r2 = st[2] / st[1]
    S = st[3] / st[1] - 1.5 * r2 * r2
    return -S / 3.0 + (1.0 - st[1] * st[1]) / 6.0


class Lattice:
    """Two-curve commuting-chain lattice (frontier storage only).

    Node (i, k) has own times t_1 = sum dt1[:i], t_2 = sum dt2[:k].  The column
    frontier holds column I at all k, the row frontier row K at all i; each
    entry is the pair of jets [omega^1, h1, h2, h3] (chart of curve 2 at xi^1)
    and [omega^2, ...] (chart of curve 1 at xi^2).
    """

    def __init__(self, theta1, theta2, nmax1, nmax2):
        self.c1 = np.zeros((nmax2 + 1, 4))
        self.c2 = np.zeros((nmax2 + 1, 4))
        self.r1 = np.zeros((nmax1 + 1, 4))
        self.r2 = np.zeros((nmax1 + 1, 4))
        self.dt1 = np.zeros(nmax1)
        self.dt2 = np.zeros(nmax2)
        self.I = 0
        self.K = 0
        st = [0.0] * 4
        _ident(st, theta1)
        self.c1[0, :] = st
        self.r1[0, :] = st
        _ident(st, theta2)
        self.c2[0, :] = st
        self.r2[0, :] = st

    def add_column(self, xi_new, D):
        K = self.K
        st = [0.0] * 4
        for k in range(K + 1):
            st[0] = self.c2[k, 0]
            st[1] = self.c2[k, 1]
            st[2] = self.c2[k, 2]
            st[3] = self.c2[k, 3]
            a = self.c1[k, 1] * self.c1[k, 1]
            if _frozen_step(st, self.c1[k, 0], a, D) != OK:
                return SWALLOWED
            self.c2[k, 0] = st[0]
            self.c2[k, 1] = st[1]
            self.c2[k, 2] = st[2]
            self.c2[k, 3] = st[3]
        _ident(st, xi_new)
        self.c1[0, 0] = st[0]
        self.c1[0, 1] = st[1]
        self.c1[0, 2] = st[2]
        self.c1[0, 3] = st[3]
        for k in range(1, K + 1):
            a = self.c2[k - 1, 1] * self.c2[k - 1, 1]
            if _frozen_step(st, self.c2[k - 1, 0], a, self.dt2[k - 1]) != OK:
                return SWALLOWED
            self.c1[k, 0] = st[0]
            self.c1[k, 1] = st[1]
            self.c1[k, 2] = st[2]
            self.c1[k, 3] = st[3]
        self.dt1[self.I] = D
        self.I += 1
        for c in range(4):
            self.r1[self.I, c] = self.c1[K, c]
            self.r2[self.I, c] = self.c2[K, c]
        return OK

    def add_row(self, xi_new, D):
        I = self.I
        st = [0.0] * 4
        for i in range(I + 1):
            st[0] = self.r1[i, 0]
            st[1] = self.r1[i, 1]
            st[2] = self.r1[i, 2]
            st[3] = self.r1[i, 3]
            a = self.r2[i, 1] * self.r2[i, 1]
            if _frozen_step(st, self.r2[i, 0], a, D) != OK:
                return SWALLOWED
            self.r1[i, 0] = st[0]
            self.r1[i, 1] = st[1]
            self.r1[i, 2] = st[2]
            self.r1[i, 3] = st[3]
        _ident(st, xi_new)
        self.r2[0, 0] = st[0]
        self.r2[0, 1] = st[1]
        self.r2[0, 2] = st[2]
        self.r2[0, 3] = st[3]
        for i in range(1, I + 1):
            a = self.r1[i - 1, 1] * self.r1[i - 1, 1]
            if _frozen_step(st, self.r1[i - 1, 0], a, self.dt1[i - 1]) != OK:
                return SWALLOWED
            self.r2[i, 0] = st[0]
            self.r2[i, 1] = st[1]
            self.r2[i, 2] = st[2]
            self.r2[i, 3] = st[3]
        self.dt2[self.K] = D
        self.K += 1
        for c in range(4):
            self.c1[self.K, c] = self.r1[I, c]
            self.c2[self.K, c] = self.r2[I, c]
        return OK


# summary slots written by lattice_path
L_STATUS, L_T1, L_T2, L_LOGG, L_M, L_XI1, L_XI2 = 0, 1, 2, 3, 4, 5, 6
L_W1, L_J1 = 7, 8  # 8, 9, 10 = h1, h2, h3 of curve 2's chart at xi^1
L_W2, L_J2 = 11, 12  # 12, 13, 14
L_FORCE, L_RUNMAX, L_NCOMMON = 15, 16, 17
L_SIZE = 18


def _jet_scale_step(h1, h2, h3, gap_factor, kappa):
    """Largest common step whose joint-chart noise stays below the jet scale / gap_factor."""
    ell = 1e6
    if h2 != 0.0 and h1 / abs(h2) < ell:
        ell = h1 / abs(h2)
    if h3 != 0.0 and h1 / abs(h3) < 1e12:
        e3 = math.sqrt(h1 / abs(h3))
        if e3 < ell:
            ell = e3
    x = h1 * ell / gap_factor
    return x * x / kappa


def _own_step(h1, h2, h3, g, dt, gap_factor, kappa):
    """Own-time step: at most dt, joint-chart noise below gap / gap_factor and jet scale / gap_factor."""
    if not (g > 0.0 and g < TWO_PI):
        return 0.0
    if TWO_PI - g < g:
        g = TWO_PI - g
    D = dt
    x = g / (gap_factor * h1)
    if x * x / kappa < D:
        D = x * x / kappa
    x = _jet_scale_step(h1, h2, h3, gap_factor, kappa) / (h1 * h1)
    if x < D:
        D = x
    return D


def _drift(L, which, kappa, mu, b):
    """Own-time drift of xi^which under the multiradial measure at the current node."""
    K = L.K
    w1 = L.c1[K, 0]
    w2 = L.c2[K, 0]
    if which == 1:
        j1 = L.c1[K, 1]
        j2 = L.c1[K, 2]
        dlog = (_cot(0.5 * (w1 - w2)) + mu) / kappa
    else:
        j1 = L.c2[K, 1]
        j2 = L.c2[K, 2]
        dlog = (_cot(0.5 * (w2 - w1)) + mu) / kappa
    return kappa * (b * j2 / j1 + j1 * dlog)


def _lattice_step(L, which, D, stream, sk, tilted, kappa, mu, b, acc):
    """Advance curve ``which`` by own time D; acc = [t1, t2, logg, m, xi1, xi2]."""
    K = L.K
    if which == 1:
        jet = (L.c1[K, 0], L.c1[K, 1], L.c1[K, 2], L.c1[K, 3])
    else:
        jet = (L.c2[K, 0], L.c2[K, 1], L.c2[K, 2], L.c2[K, 3])
    a = jet[1] * jet[1]
    nval = _schwarz_n(jet)
    drift = 0.0
    if tilted != 0:
        drift = _drift(L, which, kappa, mu, b)
    z = stream.normal()
    if which == 1:
        acc[4] = acc[4] + sk * math.sqrt(D) * z + drift * D
        st = L.add_column(acc[4], D)
        acc[0] = acc[0] + D
    else:
        acc[5] = acc[5] + sk * math.sqrt(D) * z + drift * D
        st = L.add_row(acc[5], D)
        acc[1] = acc[1] + D
    acc[2] = acc[2] + a * D
    acc[3] = acc[3] + nval * D
    return st


def lattice_path(bitgen, kappa, mu, theta1, theta2, mode, sched_curve, sched_steps, delta, dt, t_own, gap_factor, dt_min, nmax1, nmax2, summary, hist):
    """Two-curve Loewner lattice along one sampled path.

    mode 0: independent radial SLE_kappa drivings in own time, grown by the
    staircase schedule (bursts of own capacity ``sched_steps[b] * delta`` for
    curve ``sched_curve[b]``, in steps of at most ``delta`` that shrink near
    small gaps and small jet scales so the left-point m sum stays accurate).
    mode 2: multiradial drift, stepping whichever curve has the smaller own
    time by at most dt (reduced near small gaps and small jet scales) until
    t_1 = t_own; hist rows carry half the log capacity in the time slot.
    mode 1: multiradial drift in own time, advanced in common time with
    dt_j = dt_c / a^j until curve 1 reaches own time t_own.  The common step
    dt_c = dt * min(1, a^1, a^2) keeps own steps below dt, and is reduced
    further while the joint-chart gap is below gap_factor * sqrt(kappa dt_c).
    ``hist`` rows receive (t, t_1, t_2, omega^2 - omega^1) per common step.
    """
    stream = NormalStream(bitgen)
    sk = math.sqrt(kappa)
    b = (6.0 - kappa) / (2.0 * kappa)
    L = Lattice(theta1, theta2, nmax1, nmax2)
    acc = [0.0, 0.0, 0.0, 0.0, theta1, theta2]
    runmax = theta1
    st = OK
    ncommon = 0
    if mode == 0:
        for bb in range(sched_curve.shape[0]):
            which = int(sched_curve[bb])
            t = acc[which - 1] + sched_steps[bb] * delta
            while acc[which - 1] < t - 1e-15:
                if L.I >= nmax1 or L.K >= nmax2:
                    st = BAD_INPUT
                    break
                K = L.K
                g = L.c2[K, 0] - L.c1[K, 0]
                if not (g > 0.0 and g < TWO_PI):
                    st = GAP_COLLAPSE
                    break
                if which == 1:
                    D = _own_step(L.c1[K, 1], L.c1[K, 2], L.c1[K, 3], g, delta, gap_factor, kappa)
                else:
                    D = _own_step(L.c2[K, 1], L.c2[K, 2], L.c2[K, 3], g, delta, gap_factor, kappa)
                if D < dt_min:
                    D = dt_min
                if acc[which - 1] + D >= t - 1e-15:
                    D = t - acc[which - 1]
                st = _lattice_step(L, which, D, stream, sk, 0, kappa, mu, b, acc)
                if st != OK:
                    break
            if st != OK:
                break
    elif mode == 2:
        while acc[0] < t_own - 1e-15:
            if L.I >= nmax1 or L.K >= nmax2:
                st = BAD_INPUT
                break
            K = L.K
            if acc[1] < acc[0]:
                which = 2
                D = _own_step(L.c2[K, 1], L.c2[K, 2], L.c2[K, 3], L.c2[K, 0] - L.c1[K, 0], dt, gap_factor, kappa)
            else:
                which = 1
                D = _own_step(L.c1[K, 1], L.c1[K, 2], L.c1[K, 3], L.c2[K, 0] - L.c1[K, 0], dt, gap_factor, kappa)
                if acc[0] + D >= t_own - 1e-15:
                    D = t_own - acc[0]
            if D < dt_min:
                D = dt_min
            st = _lattice_step(L, which, D, stream, sk, 1, kappa, mu, b, acc)
            if st != OK:
                break
            if which == 1 and acc[4] > runmax:
                runmax = acc[4]
            if ncommon < hist.shape[0]:
                hist[ncommon, 0] = 0.5 * acc[2]
                hist[ncommon, 1] = acc[0]
                hist[ncommon, 2] = acc[1]
                hist[ncommon, 3] = L.c2[L.K, 0] - L.c1[L.K, 0]
            ncommon += 1
    else:
        t = 0.0
        while acc[0] < t_own - 1e-15:
            a1 = L.c1[L.K, 1] * L.c1[L.K, 1]
            a2 = L.c2[L.K, 1] * L.c2[L.K, 1]
            dlt = dt
            if a1 < 1.0 and a1 <= a2:
                dlt = dt * a1
            elif a2 < 1.0 and a2 < a1:
                dlt = dt * a2
            g = L.c2[L.K, 0] - L.c1[L.K, 0]
            if not (g > 0.0 and g < TWO_PI):
                st = GAP_COLLAPSE
                break
            if TWO_PI - g < g:
                g = TWO_PI - g
            gm = (g / gap_factor) * (g / gap_factor) / kappa
            if dlt > gm:
                dlt = gm
            gm = _jet_scale_step(L.c1[L.K, 1], L.c1[L.K, 2], L.c1[L.K, 3], gap_factor, kappa)
            if dlt > gm:
                dlt = gm
            gm = _jet_scale_step(L.c2[L.K, 1], L.c2[L.K, 2], L.c2[L.K, 3], gap_factor, kappa)
            if dlt > gm:
                dlt = gm
            if dlt < dt_min:
                dlt = dt_min
            D1 = dlt / a1
            last = 0
            if acc[0] + D1 >= t_own - 1e-15:
                D1 = t_own - acc[0]
                last = 1
            if L.I >= nmax1 or L.K >= nmax2:
                st = BAD_INPUT
                break
            st = _lattice_step(L, 1, D1, stream, sk, 1, kappa, mu, b, acc)
            if st != OK:
                break
            if acc[4] > runmax:
                runmax = acc[4]
            if last == 1:
                t = t + D1 * a1
            else:
                a2 = L.c2[L.K, 1] * L.c2[L.K, 1]
                st = _lattice_step(L, 2, dlt / a2, stream, sk, 1, kappa, mu, b, acc)
                if st != OK:
                    break
                t = t + dlt
            if ncommon < hist.shape[0]:
                hist[ncommon, 0] = t
                hist[ncommon, 1] = acc[0]
                hist[ncommon, 2] = acc[1]
                hist[ncommon, 3] = L.c2[L.K, 0] - L.c1[L.K, 0]
            ncommon += 1
    K = L.K
    summary[L_STATUS] = st
    summary[L_T1] = acc[0]
    summary[L_T2] = acc[1]
    summary[L_LOGG] = acc[2]
    summary[L_M] = acc[3]
    summary[L_XI1] = acc[4]
    summary[L_XI2] = acc[5]
    summary[L_W1] = L.c1[K, 0]
    summary[L_J1] = L.c1[K, 1]
    summary[L_J1 + 1] = L.c1[K, 2]
    summary[L_J1 + 2] = L.c1[K, 3]
    summary[L_W2] = L.c2[K, 0]
    summary[L_J2] = L.c2[K, 1]
    summary[L_J2 + 1] = L.c2[K, 2]
    summary[L_J2 + 2] = L.c2[K, 3]
    summary[L_FORCE] = L.c2[0, 0]
    summary[L_RUNMAX] = runmax
    summary[L_NCOMMON] = ncommon
    return st
