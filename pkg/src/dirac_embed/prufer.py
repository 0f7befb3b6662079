"""Prüfer-variable integration of ``L_{p,q}(u, v) = lambda (u, v)``.

With ``u = R cos(theta)``, ``v = R sin(theta)`` and the polar potential
``(p, q) = (V sin(phi), V cos(phi))`` the system reads::

    (ln R)' = -V cos(2 theta - phi)
    theta'  = -lambda + V sin(2 theta - phi)

Inside each segment the kernels advance ``psi = 2 theta - phi`` instead of
``theta``.  A resonance-locked solution then has ``psi == 0.0`` bit for bit;
integrating ``theta`` directly loses the lock because ``psi = 0`` is an
unstable equilibrium with growth rate ``2 V``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import get_kernels
from .errors import ParameterError, RangeOverflowError, StiffnessError
from .potential import BoundaryAngle, PotentialSegment, PotentialSpec

__all__ = [
    "DEFAULT_TOL",
    "PrueferTrajectory",
    "DirectTrajectory",
    "prufer_rhs",
    "integrate_prufer",
    "integrate_direct",
]

DEFAULT_TOL = 1e-9


def _dense(x0, x1, y0, y1, d0, d1, r5, xq):
    # cubic Hermite plus the quartic correction of the DOPRI5 continuous extension
    h = x1 - x0
    s = (xq - x0) / h
    s1 = 1.0 - s
    r2 = y1 - y0
    r3 = h * d0 - r2
    r4 = r2 - h * d1 - r3
    return y0 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)))


@dataclass(frozen=True)
class PrueferTrajectory:
    """Samples ``(x, lnR, theta)`` of one solution.

    ``slopes_lnR`` / ``slopes_theta`` hold, per sample interval, the
    derivatives at its left and right end taken from the segment that owns
    the interval, so interpolation does not smear junctions.  ``dense``
    holds the remaining continuous-extension coefficient of each interval
    (zero where the closed form is linear).
    """

    lam: float
    theta0: float
    x: np.ndarray
    lnR: np.ndarray
    theta: np.ndarray
    slopes_lnR: np.ndarray
    slopes_theta: np.ndarray
    dense: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return np.exp(self.lnR)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __len__(self):
        return len(self.x)

    def interpolate(self, xq):
        """Dense-output ``(lnR, theta)`` at ``xq`` inside the span."""
        xq = np.asarray(xq, dtype=float)
        if np.any(xq < self.x[0]) or np.any(xq > self.x[-1]):
            raise ParameterError("interpolation point outside trajectory span")
        if len(self.x) == 1:
            return np.full_like(xq, self.lnR[0]), np.full_like(xq, self.theta[0])
        k = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        x0, x1 = self.x[k], self.x[k + 1]
        lnR = _dense(x0, x1, self.lnR[k], self.lnR[k + 1], self.slopes_lnR[k, 0],
                     self.slopes_lnR[k, 1], self.dense[k, 0], xq)
        theta = _dense(x0, x1, self.theta[k], self.theta[k + 1], self.slopes_theta[k, 0],
                       self.slopes_theta[k, 1], self.dense[k, 1], xq)
        return lnR, theta

    def value_at(self, x: float) -> tuple[float, float]:
        lnR, theta = self.interpolate(np.array([x]))
        return float(lnR[0]), float(theta[0])


@dataclass(frozen=True)
class DirectTrajectory:
    lam: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    @property
    def angle(self) -> np.ndarray:
        return np.arctan2(self.v, self.u)


def prufer_rhs(x: float, theta: float, lam: float, pot: PotentialSpec) -> tuple[float, float]:
    """Return ``((ln R)', theta')`` at ``x``."""
    V, phi = pot.polar_at(x)
    arg = 2.0 * theta - phi
    return -V * math.cos(arg), -lam + V * math.sin(arg)


def _phase(seg: PotentialSegment, x: float) -> float:
    if seg.is_zero:
        return 0.0
    return -2.0 * seg.lock_lambda * (x - seg.anchor) + 2.0 * seg.phase_offset


def _subintervals(seg: PotentialSegment, a: float, b: float):
    cuts = [a] + [m for m in seg.mesh_points() if a < m < b] + [b]
    for c, d in zip(cuts, cuts[1:]):
        collar = seg.delta > 0.0 and (d <= seg.x_lo + seg.delta or c >= seg.x_hi - seg.delta)
        yield c, d, collar


def integrate_prufer(
    pot: PotentialSpec,
    lam: float,
    theta0,
    span: Sequence[float],
    tol: float = DEFAULT_TOL,
    lnR0: float = 0.0,
    max_step: float = math.inf,
    backend: str | None = None,
) -> PrueferTrajectory:
    """Integrate the Prüfer system over ``span`` starting from ``theta0``.

    ``theta0`` may be a :class:`BoundaryAngle` or an unreduced float; the
    float is used verbatim, which is what phase hand-offs between pieces
    rely on.  Segment junctions and bump collar ends are mesh points.
    """
    if tol <= 0.0:
        raise ParameterError("tol must be positive")
    kern = get_kernels(backend)
    lam = float(lam)
    x_start, x_end = float(span[0]), float(span[1])
    theta = theta0.phi0 if isinstance(theta0, BoundaryAngle) else float(theta0)
    lnR = float(lnR0)

    xs = [np.array([x_start])]
    ls = [np.array([lnR])]
    ts = [np.array([theta])]
    sl, st, dn = [], [], []

    for seg, a, b in pot.pieces(x_start, x_end):
        if seg.is_zero:
            n = 1 if not math.isfinite(max_step) else max(1, math.ceil((b - a) / max_step))
            grid = np.linspace(a, b, n + 1)
            xs.append(grid[1:])
            ls.append(np.full(n, lnR))
            ts.append(theta - lam * (grid[1:] - a))
            sl.append(np.zeros((n, 2)))
            st.append(np.full((n, 2), -lam))
            dn.append(np.zeros((n, 2)))
            theta = theta - lam * (b - a)
            continue
        row = seg.kernel_row()
        psi = 2.0 * theta - _phase(seg, a)
        kappa = row[5]
        for c, d, collar in _subintervals(seg, a, b):
            hmax = min(max_step, seg.delta / 16.0) if collar else max_step
            status, sx, sl_, sp, sdl, sdp, r5l, r5p = kern.dopri_segment(
                row, lam, c, d, lnR, psi, tol, hmax, d - c)
            if status != 0:
                raise StiffnessError(f"step size underflow near x={sx[-1]:.6g}")
            phase = -2.0 * kappa * (sx - seg.anchor) + 2.0 * seg.phase_offset
            th = 0.5 * (sp + phase)
            dth = 0.5 * sdp - kappa
            xs.append(sx[1:])
            ls.append(sl_[1:])
            ts.append(th[1:])
            sl.append(np.column_stack([sdl[:-1], sdl[1:]]))
            st.append(np.column_stack([dth[:-1], dth[1:]]))
            # theta = (psi + linear phase) / 2 and the linear part has no r5 term
            dn.append(np.column_stack([r5l, 0.5 * r5p]))
            lnR, psi = float(sl_[-1]), float(sp[-1])
        theta = 0.5 * (psi + _phase(seg, b))

    x = np.concatenate(xs)
    slopes_l = np.concatenate(sl) if sl else np.zeros((0, 2))
    slopes_t = np.concatenate(st) if st else np.zeros((0, 2))
    dense = np.concatenate(dn) if dn else np.zeros((0, 2))
    arrays = [x, np.concatenate(ls), np.concatenate(ts), slopes_l, slopes_t, dense]
    for arr in arrays:
        arr.setflags(write=False)
    return PrueferTrajectory(lam, float(theta0), *arrays)


def _envelope_bound(seg: PotentialSegment, a: float) -> float:
    if seg.is_zero:
        return 0.0
    return abs(seg.amplitude) / (a - seg.pole)


def integrate_direct(
    pot: PotentialSpec,
    lam: float,
    init: tuple[float, float],
    span: Sequence[float],
    tol: float = 1e-10,
    step: float | None = None,
    backend: str | None = None,
) -> DirectTrajectory:
    """Fixed-step RK4 on the raw two-component system (cross-check only).

    The step defaults to ``0.2 * tol**0.25 / (1 + |lambda| + sup V)`` per
    piece.  Long spans of a decaying solution lose accuracy through the
    growing companion solution; keep spans short.
    """
    u0, v0 = float(init[0]), float(init[1])
    if u0 == 0.0 and v0 == 0.0:
        raise ParameterError("initial vector must be non-zero")
    kern = get_kernels(backend)
    lam = float(lam)
    u, v = u0, v0
    xs, us, vs = [np.array([float(span[0])])], [np.array([u])], [np.array([v])]
    for seg, a, b in pot.pieces(float(span[0]), float(span[1])):
        row = seg.kernel_row()
        for c, d, _ in _subintervals(seg, a, b):
            h = step or 0.2 * tol ** 0.25 / (1.0 + abs(lam) + _envelope_bound(seg, c))
            n = max(1, math.ceil((d - c) / h))
            status, sx, su, sv = kern.rk4_segment(row, lam, c, d, u, v, n)
            if status != 0:
                raise RangeOverflowError(
                    f"u^2+v^2 overflowed near x={sx[-1]:.6g}; use integrate_prufer"
                )
            xs.append(sx[1:])
            us.append(su[1:])
            vs.append(sv[1:])
            u, v = float(su[-1]), float(sv[-1])
    return DirectTrajectory(lam, np.concatenate(xs), np.concatenate(us), np.concatenate(vs))
