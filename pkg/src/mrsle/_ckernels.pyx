# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; statement-for-statement mirror of ``_pykernels``."""
from libc.math cimport sin, cos, sqrt, log, exp, fabs, copysign, NAN
from libc.stdlib cimport malloc, free
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

import numpy as np

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0

cdef enum:
    OK = 0
    GAP_COLLAPSE = 1
    SWALLOWED = 2
    BAD_INPUT = 3
    MAXP = 32


cdef bitgen_t* _bitgen(object bitgen) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")


cdef inline double _normal(bitgen_t* bg) noexcept nogil:
    cdef double u1 = 1.0 - (bg.next_uint64(bg.state) >> 11) * INV_2_53
    cdef double u2 = (bg.next_uint64(bg.state) >> 11) * INV_2_53
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef inline double _cot(double x) noexcept nogil:
    return cos(x) / sin(x)


# ---------------------------------------------------------------- jet flows


cdef void _jet_rhs(double h, double h1, double h2, double h3, double* drive, double* rate, int p, double* out) noexcept nogil:
    cdef double v1 = 0.0, v2 = 0.0, v3 = 0.0, v4 = 0.0
    cdef double a, c, f1, f2, f3
    cdef int j
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


cdef double _min_sin(double h, double* drive, double* rate, int p) noexcept nogil:
    cdef double m = 2.0, s
    cdef int j
    for j in range(p):
        if rate[j] != 0.0:
            s = fabs(sin(0.5 * (h - drive[j])))
            if s < m:
                m = s
    return m


def jet_flow(double[:, ::1] jets, double[:, ::1] drive, double[:, ::1] rate, double dt, int substeps, double tol):
    cdef int n = jets.shape[0]
    cdef int m = drive.shape[0] - 1
    cdef int p = drive.shape[1]
    if p > MAXP:
        raise ValueError("too many driving points")
    cdef double hs = dt / substeps
    cdef double d[MAXP]
    cdef double r[MAXP]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double h, h1, h2, h3, lam0, lamh, lam1
    cdef int i, k, s, j
    for i in range(n):
        h = jets[i, 0]
        h1 = jets[i, 1]
        h2 = jets[i, 2]
        h3 = jets[i, 3]
        for k in range(m):
            for s in range(substeps):
                lam0 = <double>s / substeps
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


cdef int _frozen_step(double* st, double drive, double a, double D) noexcept nogil:
    cdef double u = st[0] - drive
    cdef double s0 = sin(0.5 * u)
    if fabs(s0) < 1e-9 or st[1] < 1e-300:
        return SWALLOWED
    cdef double x = a * D / (s0 * s0 * 0.05)
    if x > 10000.0:
        x = 10000.0
    cdef int nsub = 1 + <int>x
    cdef double hs = D / nsub
    cdef double w = st[0], h1 = st[1], h2 = st[2], h3 = st[3]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double dd = drive, aa = a
    cdef int s
    for s in range(nsub):
        _jet_rhs(w, h1, h2, h3, &dd, &aa, 1, k1)
        _jet_rhs(w + 0.5 * hs * k1[0], h1 + 0.5 * hs * k1[1], h2 + 0.5 * hs * k1[2], h3 + 0.5 * hs * k1[3], &dd, &aa, 1, k2)
        _jet_rhs(w + 0.5 * hs * k2[0], h1 + 0.5 * hs * k2[1], h2 + 0.5 * hs * k2[2], h3 + 0.5 * hs * k2[3], &dd, &aa, 1, k3)
        _jet_rhs(w + hs * k3[0], h1 + hs * k3[1], h2 + hs * k3[2], h3 + hs * k3[3], &dd, &aa, 1, k4)
        w = w + hs / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        h1 = h1 + hs / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        h2 = h2 + hs / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        h3 = h3 + hs / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    cdef double s1 = sin(0.5 * (w - drive))
    if s0 * s1 <= 0.0 or fabs(s1) < 1e-9 or not (h1 > 1e-300):
        return SWALLOWED
    st[0] = w
    st[1] = h1
    st[2] = h2
    st[3] = h3
    return OK


# ---------------------------------------------------------------- SLE_kappa^mu(rho) with force points


cdef struct RhoS:
    bitgen_t* bg
    double kappa
    double sk
    double mu
    int q
    double* rho
    double* v
    double* vnew
    double xi
    int couple
    double alpha
    double x
    double gap_factor
    double dt_min
    long nsub


cdef double _rho_gap(RhoS* S) noexcept nogil:
    cdef double g = 10.0, t
    cdef int j
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


cdef int _rho_euler(RhoS* S, double h, double dW) noexcept nogil:
    cdef double drift = S.mu, th, c
    cdef int j
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


cdef int _rho_advance(RhoS* S, double h, double dW) noexcept nogil:
    cdef double z, dW1
    cdef int st
    if _rho_gap(S) < S.gap_factor * sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = _normal(S.bg)
        dW1 = 0.5 * dW + 0.5 * sqrt(h) * z
        st = _rho_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _rho_advance(S, 0.5 * h, dW - dW1)
    return _rho_euler(S, h, dW)


def rho_path(object bitgen, double kappa, double mu, double[::1] rho, double xi0, double[::1] v0,
             double dt, long steps, int couple, double alpha, double x0, double gap_factor, double dt_min,
             double[::1] out_xi, double[:, ::1] out_v, double[::1] out_x):
    cdef RhoS S
    cdef int q = rho.shape[0]
    if q > MAXP:
        raise ValueError("too many force points")
    cdef double rbuf[MAXP]
    cdef double vbuf[MAXP]
    cdef double nbuf[MAXP]
    cdef int j, st = OK
    cdef long k, kk
    S.bg = _bitgen(bitgen)
    S.kappa = kappa
    S.sk = sqrt(kappa)
    S.mu = mu
    S.q = q
    for j in range(q):
        rbuf[j] = rho[j]
        vbuf[j] = v0[j]
        nbuf[j] = 0.0
    S.rho = rbuf
    S.v = vbuf
    S.vnew = nbuf
    S.xi = xi0
    S.couple = couple
    S.alpha = alpha
    S.x = x0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    cdef double sq = sqrt(dt), dW
    out_xi[0] = S.xi
    for j in range(q):
        out_v[j, 0] = S.v[j]
    if couple != 0:
        out_x[0] = S.x
    with nogil:
        for k in range(steps):
            dW = sq * _normal(S.bg)
            st = _rho_advance(&S, dt, dW)
            if st != OK:
                for kk in range(k + 1, steps + 1):
                    out_xi[kk] = NAN
                    for j in range(q):
                        out_v[j, kk] = NAN
                    if couple != 0:
                        out_x[kk] = NAN
                break
            out_xi[k + 1] = S.xi
            for j in range(q):
                out_v[j, k + 1] = S.v[j]
            if couple != 0:
                out_x[k + 1] = S.x
    return st, S.nsub


# ---------------------------------------------------------------- radial Bessel process


cdef struct BesS:
    bitgen_t* bg
    double kappa
    double sk
    double alpha
    double mu
    double x
    double xmin
    double xmax
    double gap_factor
    double dt_min
    long nsub


cdef int _bes_advance(BesS* S, double h, double dW) noexcept nogil:
    cdef double g = S.x, z, dW1
    cdef int st
    if TWO_PI - S.x < g:
        g = TWO_PI - S.x
    if g < S.gap_factor * sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = _normal(S.bg)
        dW1 = 0.5 * dW + 0.5 * sqrt(h) * z
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


def bessel_path(object bitgen, double kappa, double alpha, double mu, double x0, double dt, long steps,
                double gap_factor, double dt_min, double[::1] out, double[::1] extrema):
    cdef BesS S
    S.bg = _bitgen(bitgen)
    S.kappa = kappa
    S.sk = sqrt(kappa)
    S.alpha = alpha
    S.mu = mu
    S.x = x0
    S.xmin = x0
    S.xmax = x0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    cdef bint rec = out.shape[0] > 0
    cdef double sq = sqrt(dt), dW
    cdef int st = OK
    cdef long k, kk
    if rec:
        out[0] = x0
    with nogil:
        for k in range(steps):
            dW = sq * _normal(S.bg)
            st = _bes_advance(&S, dt, dW)
            if st != OK:
                if rec:
                    for kk in range(k + 1, steps + 1):
                        out[kk] = NAN
                break
            if rec:
                out[k + 1] = S.x
    extrema[0] = S.xmin
    extrema[1] = S.xmax
    return st, S.nsub


# ---------------------------------------------------------------- single-curve slice with spectators


cdef struct SliceS:
    bitgen_t* bg
    double kappa
    double sk
    int q
    double* hh
    double* lh
    double xi
    double gap_factor
    double dt_min
    long nsub


cdef int _slice_advance(SliceS* S, double h, double dW) noexcept nogil:
    cdef double g = 10.0, t, z, dW1, s, c
    cdef int j, st
    for j in range(S.q):
        t = S.hh[j] - S.xi
        if t < g:
            g = t
        if TWO_PI - t < g:
            g = TWO_PI - t
    if g < S.gap_factor * sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        z = _normal(S.bg)
        dW1 = 0.5 * dW + 0.5 * sqrt(h) * z
        st = _slice_advance(S, 0.5 * h, dW1)
        if st != OK:
            return st
        return _slice_advance(S, 0.5 * h, dW - dW1)
    for j in range(S.q):
        s = sin(0.5 * (S.hh[j] - S.xi))
        c = cos(0.5 * (S.hh[j] - S.xi)) / s
        S.hh[j] = S.hh[j] + c * h
        S.lh[j] = S.lh[j] - 0.5 / (s * s) * h
    S.xi = S.xi + S.sk * dW
    S.nsub += 1
    for j in range(S.q):
        t = S.hh[j] - S.xi
        if not (t > 1e-9 and t < TWO_PI - 1e-9):
            return SWALLOWED
    return OK


def slice_path(object bitgen, double kappa, double xi0, double[::1] theta, double dt, long steps,
               double gap_factor, double dt_min, double[::1] out):
    cdef SliceS S
    cdef int q = theta.shape[0]
    if q > MAXP:
        raise ValueError("too many spectators")
    cdef double hbuf[MAXP]
    cdef double lbuf[MAXP]
    cdef int j, st = OK
    cdef long k
    S.bg = _bitgen(bitgen)
    S.kappa = kappa
    S.sk = sqrt(kappa)
    S.q = q
    for j in range(q):
        hbuf[j] = theta[j]
        lbuf[j] = 0.0
    S.hh = hbuf
    S.lh = lbuf
    S.xi = xi0
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    cdef double sq = sqrt(dt), dW
    with nogil:
        for k in range(steps):
            dW = sq * _normal(S.bg)
            st = _slice_advance(&S, dt, dW)
            if st != OK:
                break
    out[0] = S.xi
    for j in range(q):
        out[1 + j] = S.hh[j]
        out[1 + q + j] = S.lh[j]
    return st, S.nsub


# ---------------------------------------------------------------- common-time multiradial driving


cdef struct MultiS:
    bitgen_t* bg
    double kappa
    double sk
    double mu
    int p
    double* w
    double* wn
    double gap_factor
    double dt_min
    long nsub


cdef double _multi_gap(MultiS* S) noexcept nogil:
    cdef double g = 10.0, t
    cdef int j
    for j in range(S.p):
        if j + 1 < S.p:
            t = S.w[j + 1] - S.w[j]
        else:
            t = S.w[0] + TWO_PI - S.w[S.p - 1]
        if t < g:
            g = t
    return g


cdef int _multi_advance(MultiS* S, double h, double* dW) noexcept nogil:
    cdef double dW1[MAXP]
    cdef double dW2[MAXP]
    cdef double sh, z, drift
    cdef int j, i, st
    if _multi_gap(S) < S.gap_factor * sqrt(S.kappa * h) and 0.5 * h >= S.dt_min:
        sh = 0.5 * sqrt(h)
        for j in range(S.p):
            z = _normal(S.bg)
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


def multiradial_path(object bitgen, double kappa, double mu, double[::1] omega0, double dt, long steps,
                     double gap_factor, double dt_min, double[:, ::1] out):
    cdef MultiS S
    cdef int p = omega0.shape[0]
    if p > MAXP:
        raise ValueError("too many curves")
    cdef double wbuf[MAXP]
    cdef double nbuf[MAXP]
    cdef double dW[MAXP]
    cdef int j, st = OK
    cdef long k, kk
    S.bg = _bitgen(bitgen)
    S.kappa = kappa
    S.sk = sqrt(kappa)
    S.mu = mu
    S.p = p
    for j in range(p):
        wbuf[j] = omega0[j]
        nbuf[j] = 0.0
    S.w = wbuf
    S.wn = nbuf
    S.gap_factor = gap_factor
    S.dt_min = dt_min
    S.nsub = 0
    cdef double sq = sqrt(dt)
    for j in range(p):
        out[0, j] = S.w[j]
    with nogil:
        for k in range(steps):
            for j in range(p):
                dW[j] = sq * _normal(S.bg)
            st = _multi_advance(&S, dt, dW)
            if st != OK:
                for kk in range(k + 1, steps + 1):
                    for j in range(p):
                        out[kk, j] = NAN
                break
            for j in range(p):
                out[k + 1, j] = S.w[j]
    return st, S.nsub


# ---------------------------------------------------------------- zipper tracing


cdef inline void _csqrt(double a, double b, double* outr, double* outi) noexcept nogil:
    cdef double m = sqrt(a * a + b * b), t
    if a >= 0.0:
        t = sqrt(0.5 * (m + a))
        if t == 0.0:
            outr[0] = 0.0
            outi[0] = 0.0
            return
        outr[0] = t
        outi[0] = b / (2.0 * t)
        return
    t = sqrt(0.5 * (m - a))
    outr[0] = fabs(b) / (2.0 * t)
    outi[0] = copysign(t, b)


cdef inline void _slit_inverse(double* wr, double* wi, double cx, double sx, double ed) noexcept nogil:
    cdef double zr = wr[0] * cx + wi[0] * sx
    cdef double zi = wi[0] * cx - wr[0] * sx
    cdef double pr = (1.0 + zr) * (1.0 + zr) - zi * zi
    cdef double pi_ = 2.0 * (1.0 + zr) * zi
    cdef double den = pr * pr + pi_ * pi_
    cdef double nr = ed * zr
    cdef double ni = ed * zi
    cdef double cr = (nr * pr + ni * pi_) / den
    cdef double ci = (ni * pr - nr * pi_) / den
    cdef double br = 2.0 * cr - 1.0
    cdef double bi = 2.0 * ci
    cdef double sr, si, qr, qi, cc, qq, xr, xi_
    _csqrt(1.0 - 4.0 * cr, -4.0 * ci, &sr, &si)
    if br * sr + bi * si < 0.0:
        sr = -sr
        si = -si
    qr = -0.5 * (br + sr)
    qi = -0.5 * (bi + si)
    cc = cr * cr + ci * ci
    qq = qr * qr + qi * qi
    if qq <= cc:
        xr = (qr * cr + qi * ci) / cc
        xi_ = (qi * cr - qr * ci) / cc
    else:
        xr = (cr * qr + ci * qi) / qq
        xi_ = (ci * qr - cr * qi) / qq
    wr[0] = xr * cx - xi_ * sx
    wi[0] = xr * sx + xi_ * cx


def zipper_tips(double[::1] xi, double dt, long stride, double stop_radius, double[:, ::1] out):
    cdef long n = xi.shape[0] - 1
    cdef double ed = exp(-dt)
    cdef double r0 = (2.0 - ed - 2.0 * sqrt(1.0 - ed)) / ed
    cdef double stop2 = stop_radius * stop_radius
    cdef long nout = out.shape[0]
    cdef double[::1] cs = np.empty(n + 1)
    cdef double[::1] sn = np.empty(n + 1)
    cdef long i, k, j, cnt
    cdef double wr, wi
    for i in range(n + 1):
        cs[i] = cos(xi[i])
        sn[i] = sin(xi[i])
    out[0, 0] = cs[0]
    out[0, 1] = sn[0]
    cnt = 1
    k = stride
    with nogil:
        while k <= n and cnt < nout:
            wr = r0 * cs[k - 1]
            wi = r0 * sn[k - 1]
            j = k - 1
            while j > 0:
                _slit_inverse(&wr, &wi, cs[j - 1], sn[j - 1], ed)
                j -= 1
            out[cnt, 0] = wr
            out[cnt, 1] = wi
            cnt += 1
            if wr * wr + wi * wi <= stop2:
                break
            k += stride
    return cnt


# ---------------------------------------------------------------- two-curve commuting lattice


cdef struct Lat:
    double* c1
    double* c2
    double* r1
    double* r2
    double* dt1
    double* dt2
    long ni
    long nk


cdef inline void _ident(double* st, double w) noexcept nogil:
    st[0] = w
    st[1] = 1.0
    st[2] = 0.0
    st[3] = 0.0


cdef inline double _schwarz_n(double* st) noexcept nogil:
    cdef double r2 = st[2] / st[1]
    cdef double S = st[3] / st[1] - 1.5 * r2 * r2
    return -S / 3.0 + (1.0 - st[1] * st[1]) / 6.0


cdef inline void _cp(double* dst, double* src) noexcept nogil:
    dst[0] = src[0]
    dst[1] = src[1]
    dst[2] = src[2]
    dst[3] = src[3]


cdef int _add_column(Lat* L, double xi_new, double D) noexcept nogil:
    cdef long K = L.nk, k
    cdef double st[4]
    cdef double a
    for k in range(K + 1):
        _cp(st, L.c2 + 4 * k)
        a = L.c1[4 * k + 1] * L.c1[4 * k + 1]
        if _frozen_step(st, L.c1[4 * k], a, D) != OK:
            return SWALLOWED
        _cp(L.c2 + 4 * k, st)
    _ident(st, xi_new)
    _cp(L.c1, st)
    for k in range(1, K + 1):
        a = L.c2[4 * (k - 1) + 1] * L.c2[4 * (k - 1) + 1]
        if _frozen_step(st, L.c2[4 * (k - 1)], a, L.dt2[k - 1]) != OK:
            return SWALLOWED
        _cp(L.c1 + 4 * k, st)
    L.dt1[L.ni] = D
    L.ni += 1
    _cp(L.r1 + 4 * L.ni, L.c1 + 4 * K)
    _cp(L.r2 + 4 * L.ni, L.c2 + 4 * K)
    return OK


cdef int _add_row(Lat* L, double xi_new, double D) noexcept nogil:
    cdef long I = L.ni, i
    cdef double st[4]
    cdef double a
    for i in range(I + 1):
        _cp(st, L.r1 + 4 * i)
        a = L.r2[4 * i + 1] * L.r2[4 * i + 1]
        if _frozen_step(st, L.r2[4 * i], a, D) != OK:
            return SWALLOWED
        _cp(L.r1 + 4 * i, st)
    _ident(st, xi_new)
    _cp(L.r2, st)
    for i in range(1, I + 1):
        a = L.r1[4 * (i - 1) + 1] * L.r1[4 * (i - 1) + 1]
        if _frozen_step(st, L.r1[4 * (i - 1)], a, L.dt1[i - 1]) != OK:
            return SWALLOWED
        _cp(L.r2 + 4 * i, st)
    L.dt2[L.nk] = D
    L.nk += 1
    _cp(L.c1 + 4 * L.nk, L.r1 + 4 * I)
    _cp(L.c2 + 4 * L.nk, L.r2 + 4 * I)
    return OK


cdef double _jet_scale_step(double h1, double h2, double h3, double gap_factor, double kappa) noexcept nogil:
    cdef double ell = 1e6, e3, x
    if h2 != 0.0 and h1 / fabs(h2) < ell:
        ell = h1 / fabs(h2)
    if h3 != 0.0 and h1 / fabs(h3) < 1e12:
        e3 = sqrt(h1 / fabs(h3))
        if e3 < ell:
            ell = e3
    x = h1 * ell / gap_factor
    return x * x / kappa


cdef double _own_step(double h1, double h2, double h3, double g, double dt, double gap_factor, double kappa) noexcept nogil:
    if not (g > 0.0 and g < TWO_PI):
        return 0.0
    if TWO_PI - g < g:
        g = TWO_PI - g
    cdef double D = dt
    cdef double x = g / (gap_factor * h1)
    if x * x / kappa < D:
        D = x * x / kappa
    x = _jet_scale_step(h1, h2, h3, gap_factor, kappa) / (h1 * h1)
    if x < D:
        D = x
    return D


cdef double _drift(Lat* L, int which, double kappa, double mu, double b) noexcept nogil:
    cdef long K = L.nk
    cdef double w1 = L.c1[4 * K], w2 = L.c2[4 * K], j1, j2, dlog
    if which == 1:
        j1 = L.c1[4 * K + 1]
        j2 = L.c1[4 * K + 2]
        dlog = (_cot(0.5 * (w1 - w2)) + mu) / kappa
    else:
        j1 = L.c2[4 * K + 1]
        j2 = L.c2[4 * K + 2]
        dlog = (_cot(0.5 * (w2 - w1)) + mu) / kappa
    return kappa * (b * j2 / j1 + j1 * dlog)


cdef int _lattice_step(Lat* L, int which, double D, bitgen_t* bg, double sk, int tilted,
                       double kappa, double mu, double b, double* acc) noexcept nogil:
    cdef long K = L.nk
    cdef double* jet
    if which == 1:
        jet = L.c1 + 4 * K
    else:
        jet = L.c2 + 4 * K
    cdef double a = jet[1] * jet[1]
    cdef double nval = _schwarz_n(jet)
    cdef double drift = 0.0, z
    cdef int st
    if tilted != 0:
        drift = _drift(L, which, kappa, mu, b)
    z = _normal(bg)
    if which == 1:
        acc[4] = acc[4] + sk * sqrt(D) * z + drift * D
        st = _add_column(L, acc[4], D)
        acc[0] = acc[0] + D
    else:
        acc[5] = acc[5] + sk * sqrt(D) * z + drift * D
        st = _add_row(L, acc[5], D)
        acc[1] = acc[1] + D
    acc[2] = acc[2] + a * D
    acc[3] = acc[3] + nval * D
    return st


def lattice_path(object bitgen, double kappa, double mu, double theta1, double theta2, int mode,
                 long[::1] sched_curve, long[::1] sched_steps, double delta, double dt, double t_own,
                 double gap_factor, double dt_min, long nmax1, long nmax2, double[::1] summary, double[:, ::1] hist):
    cdef bitgen_t* bg = _bitgen(bitgen)
    cdef double sk = sqrt(kappa)
    cdef double b = (6.0 - kappa) / (2.0 * kappa)
    cdef double[:, ::1] c1 = np.zeros((nmax2 + 1, 4))
    cdef double[:, ::1] c2 = np.zeros((nmax2 + 1, 4))
    cdef double[:, ::1] r1 = np.zeros((nmax1 + 1, 4))
    cdef double[:, ::1] r2 = np.zeros((nmax1 + 1, 4))
    cdef double[::1] dt1 = np.zeros(nmax1 + 1)
    cdef double[::1] dt2 = np.zeros(nmax2 + 1)
    cdef Lat L
    L.c1 = &c1[0, 0]
    L.c2 = &c2[0, 0]
    L.r1 = &r1[0, 0]
    L.r2 = &r2[0, 0]
    L.dt1 = &dt1[0]
    L.dt2 = &dt2[0]
    L.ni = 0
    L.nk = 0
    cdef double st4[4]
    _ident(st4, theta1)
    _cp(L.c1, st4)
    _cp(L.r1, st4)
    _ident(st4, theta2)
    _cp(L.c2, st4)
    _cp(L.r2, st4)
    cdef double acc[6]
    acc[0] = 0.0
    acc[1] = 0.0
    acc[2] = 0.0
    acc[3] = 0.0
    acc[4] = theta1
    acc[5] = theta2
    cdef double runmax = theta1
    cdef int st = OK
    cdef long ncommon = 0, bb, K
    cdef long nb = sched_curve.shape[0]
    cdef long nh = hist.shape[0]
    cdef double t, a1, a2, D1, dlt, g, gm
    cdef int last, which
    with nogil:
        if mode == 0:
            for bb in range(nb):
                which = <int>sched_curve[bb]
                t = acc[which - 1] + sched_steps[bb] * delta
                while acc[which - 1] < t - 1e-15:
                    if L.ni >= nmax1 or L.nk >= nmax2:
                        st = BAD_INPUT
                        break
                    K = L.nk
                    g = L.c2[4 * K] - L.c1[4 * K]
                    if not (g > 0.0 and g < TWO_PI):
                        st = GAP_COLLAPSE
                        break
                    if which == 1:
                        D1 = _own_step(L.c1[4 * K + 1], L.c1[4 * K + 2], L.c1[4 * K + 3], g, delta, gap_factor, kappa)
                    else:
                        D1 = _own_step(L.c2[4 * K + 1], L.c2[4 * K + 2], L.c2[4 * K + 3], g, delta, gap_factor, kappa)
                    if D1 < dt_min:
                        D1 = dt_min
                    if acc[which - 1] + D1 >= t - 1e-15:
                        D1 = t - acc[which - 1]
                    st = _lattice_step(&L, which, D1, bg, sk, 0, kappa, mu, b, acc)
                    if st != OK:
                        break
                if st != OK:
                    break
        elif mode == 2:
            while acc[0] < t_own - 1e-15:
                if L.ni >= nmax1 or L.nk >= nmax2:
                    st = BAD_INPUT
                    break
                K = L.nk
                if acc[1] < acc[0]:
                    which = 2
                    D1 = _own_step(L.c2[4 * K + 1], L.c2[4 * K + 2], L.c2[4 * K + 3], L.c2[4 * K] - L.c1[4 * K], dt, gap_factor, kappa)
                else:
                    which = 1
                    D1 = _own_step(L.c1[4 * K + 1], L.c1[4 * K + 2], L.c1[4 * K + 3], L.c2[4 * K] - L.c1[4 * K], dt, gap_factor, kappa)
                    if acc[0] + D1 >= t_own - 1e-15:
                        D1 = t_own - acc[0]
                if D1 < dt_min:
                    D1 = dt_min
                st = _lattice_step(&L, which, D1, bg, sk, 1, kappa, mu, b, acc)
                if st != OK:
                    break
                if which == 1 and acc[4] > runmax:
                    runmax = acc[4]
                if ncommon < nh:
                    hist[ncommon, 0] = 0.5 * acc[2]
                    hist[ncommon, 1] = acc[0]
                    hist[ncommon, 2] = acc[1]
                    hist[ncommon, 3] = L.c2[4 * L.nk] - L.c1[4 * L.nk]
                ncommon += 1
        else:
            t = 0.0
            while acc[0] < t_own - 1e-15:
                a1 = L.c1[4 * L.nk + 1] * L.c1[4 * L.nk + 1]
                a2 = L.c2[4 * L.nk + 1] * L.c2[4 * L.nk + 1]
                dlt = dt
                if a1 < 1.0 and a1 <= a2:
                    dlt = dt * a1
                elif a2 < 1.0 and a2 < a1:
                    dlt = dt * a2
                g = L.c2[4 * L.nk] - L.c1[4 * L.nk]
                if not (g > 0.0 and g < TWO_PI):
                    st = GAP_COLLAPSE
                    break
                if TWO_PI - g < g:
                    g = TWO_PI - g
                gm = (g / gap_factor) * (g / gap_factor) / kappa
                if dlt > gm:
                    dlt = gm
                gm = _jet_scale_step(L.c1[4 * L.nk + 1], L.c1[4 * L.nk + 2], L.c1[4 * L.nk + 3], gap_factor, kappa)
                if dlt > gm:
                    dlt = gm
                gm = _jet_scale_step(L.c2[4 * L.nk + 1], L.c2[4 * L.nk + 2], L.c2[4 * L.nk + 3], gap_factor, kappa)
                if dlt > gm:
                    dlt = gm
                if dlt < dt_min:
                    dlt = dt_min
                D1 = dlt / a1
                last = 0
                if acc[0] + D1 >= t_own - 1e-15:
                    D1 = t_own - acc[0]
                    last = 1
                if L.ni >= nmax1 or L.nk >= nmax2:
                    st = BAD_INPUT
                    break
                st = _lattice_step(&L, 1, D1, bg, sk, 1, kappa, mu, b, acc)
                if st != OK:
                    break
                if acc[4] > runmax:
                    runmax = acc[4]
                if last == 1:
                    t = t + D1 * a1
                else:
                    a2 = L.c2[4 * L.nk + 1] * L.c2[4 * L.nk + 1]
                    st = _lattice_step(&L, 2, dlt / a2, bg, sk, 1, kappa, mu, b, acc)
                    if st != OK:
                        break
                    t = t + dlt
                if ncommon < nh:
                    hist[ncommon, 0] = t
                    hist[ncommon, 1] = acc[0]
                    hist[ncommon, 2] = acc[1]
                    hist[ncommon, 3] = L.c2[4 * L.nk] - L.c1[4 * L.nk]
                ncommon += 1
    K = L.nk
    summary[0] = st
    summary[1] = acc[0]
    summary[2] = acc[1]
    summary[3] = acc[2]
    summary[4] = acc[3]
    summary[5] = acc[4]
    summary[6] = acc[5]
    summary[7] = L.c1[4 * K]
    summary[8] = L.c1[4 * K + 1]
    summary[9] = L.c1[4 * K + 2]
    summary[10] = L.c1[4 * K + 3]
    summary[11] = L.c2[4 * K]
    summary[12] = L.c2[4 * K + 1]
    summary[13] = L.c2[4 * K + 2]
    summary[14] = L.c2[4 * K + 3]
    summary[15] = L.c2[0]
    summary[16] = runmax
    summary[17] = ncommon
    return st
