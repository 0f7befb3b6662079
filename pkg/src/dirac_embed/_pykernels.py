"""Pure-Python integration kernels.

Line-for-line twin of ``_ckernels.pyx``; used when the extension is not
built or ``DIRAC_EMBED_PURE_PYTHON`` is set.  A segment row is
``[amp, pole, delta, x_lo, x_hi, kappa, anchor, offset]``.

State in the adaptive kernel is ``(lnR, psi)`` with ``psi = 2*theta - phi``.
"""
import math

import numpy as np

OK = 0
STIFF = 1
OVERFLOW = 2

# Dormand-Prince 5(4)
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
# continuous extension (Hairer-Norsett-Wanner, dopri5 contd5)
_D1, _D3, _D4 = -12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0, \
    -10690763975.0 / 1880347072.0
_D5, _D6, _D7 = 701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0, \
    69997945.0 / 29380423.0


def _edge(t):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    f0 = math.exp(-1.0 / t)
    f1 = math.exp(-1.0 / (1.0 - t))
    return f0 / (f0 + f1)


def envelope(row, x):
    amp, pole, delta, x_lo, x_hi = row[0], row[1], row[2], row[3], row[4]
    if amp == 0.0:
        return 0.0
    v = amp / (x - pole)
    if delta > 0.0:
        if x <= x_lo or x >= x_hi:
            return 0.0
        t = (x - x_lo) / delta
        if t < 1.0:
            v *= _edge(t)
        t = (x_hi - x) / delta
        if t < 1.0:
            v *= _edge(t)
    return v


def _cap(row, lam, x, hmax):
    amp, pole, kappa = row[0], row[1], row[5]
    cap = hmax
    rate = abs(lam - kappa) + abs(envelope(row, x))
    if rate > 0.0:
        cap = min(cap, 0.1 / rate)
    if amp != 0.0:
        cap = min(cap, 0.02 * (x - pole))
    return cap


def dopri_segment(row, lam, xa, xb, lnr0, psi0, tol, hmax, h0):
    """Adaptive DOPRI5 on one smooth piece; returns samples at accepted steps.

    The last two arrays hold the fifth dense-output coefficient per step;
    with the end values and slopes they give the quartic continuous
    extension of the method.
    """
    w = 2.0 * (row[5] - lam)
    xs = [xa]
    ls = [lnr0]
    ps = [psi0]
    x, l, p = xa, lnr0, psi0
    V = envelope(row, x)
    k1l, k1p = -V * math.cos(p), w + 2.0 * V * math.sin(p)
    dls = [k1l]
    dps = [k1p]
    r5l = []
    r5p = []
    h = min(h0, xb - xa)
    status = OK
    while x < xb:
        cap = _cap(row, lam, x, hmax)
        if h > cap:
            h = cap
        last = False
        if x + h >= xb or (xb - x - h) <= 1e-14 * abs(xb):
            h = xb - x
            last = True

        p2 = p + h * (_A21 * k1p)
        V = envelope(row, x + _C2 * h)
        k2l, k2p = -V * math.cos(p2), w + 2.0 * V * math.sin(p2)
        p3 = p + h * (_A31 * k1p + _A32 * k2p)
        V = envelope(row, x + _C3 * h)
        k3l, k3p = -V * math.cos(p3), w + 2.0 * V * math.sin(p3)
        p4 = p + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
        V = envelope(row, x + _C4 * h)
        k4l, k4p = -V * math.cos(p4), w + 2.0 * V * math.sin(p4)
        p5 = p + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
        V = envelope(row, x + _C5 * h)
        k5l, k5p = -V * math.cos(p5), w + 2.0 * V * math.sin(p5)
        p6 = p + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p + _A65 * k5p)
        V = envelope(row, x + h)
        k6l, k6p = -V * math.cos(p6), w + 2.0 * V * math.sin(p6)
        lnew = l + h * (_B1 * k1l + _B3 * k3l + _B4 * k4l + _B5 * k5l + _B6 * k6l)
        pnew = p + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p + _B6 * k6p)
        k7l, k7p = -V * math.cos(pnew), w + 2.0 * V * math.sin(pnew)

        el = h * (_E1 * k1l + _E3 * k3l + _E4 * k4l + _E5 * k5l + _E6 * k6l + _E7 * k7l)
        ep = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p + _E7 * k7p)
        err = math.sqrt(0.5 * ((el / tol) ** 2 + (ep / tol) ** 2))

        if err <= 1.0:
            x = xb if last else x + h
            r5l.append(h * (_D1 * k1l + _D3 * k3l + _D4 * k4l + _D5 * k5l + _D6 * k6l + _D7 * k7l))
            r5p.append(h * (_D1 * k1p + _D3 * k3p + _D4 * k4p + _D5 * k5p + _D6 * k6p + _D7 * k7p))
            l, p = lnew, pnew
            k1l, k1p = k7l, k7p
            xs.append(x)
            ls.append(l)
            ps.append(p)
            dls.append(k1l)
            dps.append(k1p)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < 1e-13 * max(1.0, abs(x)):
                status = STIFF
                break
    return (status, np.array(xs), np.array(ls), np.array(ps),
            np.array(dls), np.array(dps), np.array(r5l), np.array(r5p))


def _pq(row, x):
    V = envelope(row, x)
    phi = -2.0 * row[5] * (x - row[6]) + 2.0 * row[7]
    return V * math.sin(phi), V * math.cos(phi)


def rk4_segment(row, lam, xa, xb, u0, v0, n):
    """Classical RK4 with ``n`` equal steps on the raw ``(u, v)`` system."""
    h = (xb - xa) / n
    xs = np.empty(n + 1)
    us = np.empty(n + 1)
    vs = np.empty(n + 1)
    u, v = u0, v0
    xs[0], us[0], vs[0] = xa, u, v
    status = OK
    for i in range(n):
        x = xa + i * h
        p, q = _pq(row, x)
        k1u = lam * v - q * u - p * v
        k1v = -lam * u - p * u + q * v
        p, q = _pq(row, x + 0.5 * h)
        ut, vt = u + 0.5 * h * k1u, v + 0.5 * h * k1v
        k2u = lam * vt - q * ut - p * vt
        k2v = -lam * ut - p * ut + q * vt
        ut, vt = u + 0.5 * h * k2u, v + 0.5 * h * k2v
        k3u = lam * vt - q * ut - p * vt
        k3v = -lam * ut - p * ut + q * vt
        p, q = _pq(row, x + h)
        ut, vt = u + h * k3u, v + h * k3v
        k4u = lam * vt - q * ut - p * vt
        k4v = -lam * ut - p * ut + q * vt
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        xs[i + 1] = xb if i == n - 1 else xa + (i + 1) * h
        us[i + 1], vs[i + 1] = u, v
        if not (u * u + v * v < 1e280):
            status = OVERFLOW
            return status, xs[: i + 2], us[: i + 2], vs[: i + 2]
    return status, xs, us, vs
