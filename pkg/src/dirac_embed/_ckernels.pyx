# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_pykernels``; same signatures, same arithmetic."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, fabs, sqrt, pow

cnp.import_array()

DEF OK = 0
DEF STIFF = 1
DEF OVERFLOW = 2

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0


cdef struct Seg:
    double amp
    double pole
    double delta
    double x_lo
    double x_hi
    double kappa
    double anchor
    double offset


cdef Seg _unpack(row):
    cdef Seg s
    s.amp = row[0]
    s.pole = row[1]
    s.delta = row[2]
    s.x_lo = row[3]
    s.x_hi = row[4]
    s.kappa = row[5]
    s.anchor = row[6]
    s.offset = row[7]
    return s


cdef inline double _edge(double t) nogil:
    cdef double f0, f1
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    f0 = exp(-1.0 / t)
    f1 = exp(-1.0 / (1.0 - t))
    return f0 / (f0 + f1)


cdef inline double _envelope(Seg* s, double x) nogil:
    cdef double v, t
    if s.amp == 0.0:
        return 0.0
    v = s.amp / (x - s.pole)
    if s.delta > 0.0:
        if x <= s.x_lo or x >= s.x_hi:
            return 0.0
        t = (x - s.x_lo) / s.delta
        if t < 1.0:
            v *= _edge(t)
        t = (s.x_hi - x) / s.delta
        if t < 1.0:
            v *= _edge(t)
    return v


def envelope(row, double x):
    cdef Seg s = _unpack(row)
    return _envelope(&s, x)


cdef inline double _cap(Seg* s, double lam, double x, double hmax) nogil:
    cdef double cap = hmax, rate
    rate = fabs(lam - s.kappa) + fabs(_envelope(s, x))
    if rate > 0.0 and 0.1 / rate < cap:
        cap = 0.1 / rate
    if s.amp != 0.0 and 0.02 * (x - s.pole) < cap:
        cap = 0.02 * (x - s.pole)
    return cap


cdef class _Buf:
    cdef public object arr
    cdef double[:, ::1] view
    cdef Py_ssize_t n, cap

    def __cinit__(self, Py_ssize_t cap):
        self.arr = np.empty((7, cap))
        self.view = self.arr
        self.n = 0
        self.cap = cap

    cdef void push(self, double x, double l, double p, double dl, double dp,
                   double r5l, double r5p):
        if self.n == self.cap:
            self.cap *= 2
            new = np.empty((7, self.cap))
            new[:, : self.n] = self.arr[:, : self.n]
            self.arr = new
            self.view = self.arr
        self.view[0, self.n] = x
        self.view[1, self.n] = l
        self.view[2, self.n] = p
        self.view[3, self.n] = dl
        self.view[4, self.n] = dp
        self.view[5, self.n] = r5l
        self.view[6, self.n] = r5p
        self.n += 1


def dopri_segment(row, double lam, double xa, double xb, double lnr0, double psi0,
                  double tol, double hmax, double h0):
    cdef Seg s = _unpack(row)
    cdef double w = 2.0 * (s.kappa - lam)
    cdef double x = xa, l = lnr0, p = psi0, h, cap, V, err, fac
    cdef double k1l, k1p, k2l, k2p, k3l, k3p, k4l, k4p, k5l, k5p, k6l, k6p, k7l, k7p
    cdef double p2, p3, p4, p5, p6, lnew, pnew, el, ep, r5l, r5p
    cdef bint last
    cdef int status = OK
    cdef _Buf buf = _Buf(256)

    V = _envelope(&s, x)
    k1l = -V * cos(p)
    k1p = w + 2.0 * V * sin(p)
    buf.push(x, l, p, k1l, k1p, 0.0, 0.0)
    h = h0 if h0 < xb - xa else xb - xa
    while x < xb:
        cap = _cap(&s, lam, x, hmax)
        if h > cap:
            h = cap
        last = False
        if x + h >= xb or (xb - x - h) <= 1e-14 * fabs(xb):
            h = xb - x
            last = True

        p2 = p + h * (A21 * k1p)
        V = _envelope(&s, x + C2 * h)
        k2l = -V * cos(p2)
        k2p = w + 2.0 * V * sin(p2)
        p3 = p + h * (A31 * k1p + A32 * k2p)
        V = _envelope(&s, x + C3 * h)
        k3l = -V * cos(p3)
        k3p = w + 2.0 * V * sin(p3)
        p4 = p + h * (A41 * k1p + A42 * k2p + A43 * k3p)
        V = _envelope(&s, x + C4 * h)
        k4l = -V * cos(p4)
        k4p = w + 2.0 * V * sin(p4)
        p5 = p + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
        V = _envelope(&s, x + C5 * h)
        k5l = -V * cos(p5)
        k5p = w + 2.0 * V * sin(p5)
        p6 = p + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
        V = _envelope(&s, x + h)
        k6l = -V * cos(p6)
        k6p = w + 2.0 * V * sin(p6)
        lnew = l + h * (B1 * k1l + B3 * k3l + B4 * k4l + B5 * k5l + B6 * k6l)
        pnew = p + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
        k7l = -V * cos(pnew)
        k7p = w + 2.0 * V * sin(pnew)

        el = h * (E1 * k1l + E3 * k3l + E4 * k4l + E5 * k5l + E6 * k6l + E7 * k7l)
        ep = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
        err = sqrt(0.5 * ((el / tol) * (el / tol) + (ep / tol) * (ep / tol)))

        if err <= 1.0:
            x = xb if last else x + h
            r5l = h * (D1 * k1l + D3 * k3l + D4 * k4l + D5 * k5l + D6 * k6l + D7 * k7l)
            r5p = h * (D1 * k1p + D3 * k3p + D4 * k4p + D5 * k5p + D6 * k6p + D7 * k7p)
            l = lnew
            p = pnew
            k1l = k7l
            k1p = k7p
            buf.push(x, l, p, k1l, k1p, r5l, r5p)
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                if fac > 5.0:
                    fac = 5.0
            h *= fac
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            h *= fac
            if h < 1e-13 * (fabs(x) if fabs(x) > 1.0 else 1.0):
                status = STIFF
                break
    out = buf.arr[:, : buf.n].copy()
    # r5 of step i sits in column i + 1
    return status, out[0], out[1], out[2], out[3], out[4], out[5, 1:], out[6, 1:]


cdef inline void _pq(Seg* s, double x, double* p, double* q) nogil:
    cdef double V = _envelope(s, x)
    cdef double phi = -2.0 * s.kappa * (x - s.anchor) + 2.0 * s.offset
    p[0] = V * sin(phi)
    q[0] = V * cos(phi)


def rk4_segment(row, double lam, double xa, double xb, double u0, double v0, Py_ssize_t n):
    cdef Seg s = _unpack(row)
    cdef double h = (xb - xa) / n
    xs_arr = np.empty(n + 1)
    us_arr = np.empty(n + 1)
    vs_arr = np.empty(n + 1)
    cdef double[::1] xs = xs_arr, us = us_arr, vs = vs_arr
    cdef double u = u0, v = v0, x, p, q, ut, vt
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v
    cdef Py_ssize_t i
    xs[0] = xa
    us[0] = u
    vs[0] = v
    for i in range(n):
        x = xa + i * h
        _pq(&s, x, &p, &q)
        k1u = lam * v - q * u - p * v
        k1v = -lam * u - p * u + q * v
        _pq(&s, x + 0.5 * h, &p, &q)
        ut = u + 0.5 * h * k1u
        vt = v + 0.5 * h * k1v
        k2u = lam * vt - q * ut - p * vt
        k2v = -lam * ut - p * ut + q * vt
        ut = u + 0.5 * h * k2u
        vt = v + 0.5 * h * k2v
        k3u = lam * vt - q * ut - p * vt
        k3v = -lam * ut - p * ut + q * vt
        _pq(&s, x + h, &p, &q)
        ut = u + h * k3u
        vt = v + h * k3v
        k4u = lam * vt - q * ut - p * vt
        k4v = -lam * ut - p * ut + q * vt
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        xs[i + 1] = xb if i == n - 1 else xa + (i + 1) * h
        us[i + 1] = u
        vs[i + 1] = v
        if not (u * u + v * v < 1e280):
            return OVERFLOW, xs_arr[: i + 2], us_arr[: i + 2], vs_arr[: i + 2]
    return OK, xs_arr, us_arr, vs_arr
