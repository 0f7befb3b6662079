"""Piecewise potentials for the canonical Dirac system in polar form.

A potential pair ``(p, q)`` is stored as an envelope ``V`` and a phase ``phi``
with ``q = V cos(phi)`` and ``p = V sin(phi)``.  Each segment carries a linear
phase ``phi(x) = -2*kappa*(x - anchor) + 2*offset``; ``kappa`` doubles as the
rotation rate of the frame the integrators work in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateTargetError, DomainError, ParameterError

__all__ = [
    "BoundaryAngle",
    "EigenTarget",
    "SegmentKind",
    "PotentialSegment",
    "PotentialSpec",
    "polar_to_pq",
    "smooth_step",
    "validate_targets",
]


def polar_to_pq(V, phi):
    """Return ``(p, q) = (V sin phi, V cos phi)``; works on scalars and arrays."""
    if np.ndim(V) == 0 and np.ndim(phi) == 0:
        return V * math.sin(phi), V * math.cos(phi)
    V = np.asarray(V, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return V * np.sin(phi), V * np.cos(phi)


def smooth_step(t):
    """C-infinity step ``f(t) / (f(t) + f(1 - t))`` with ``f(t) = exp(-1/t)``.

    Equals 0 for ``t <= 0`` and 1 for ``t >= 1``.
    """
    t = np.asarray(t, dtype=float)
    out = np.array(np.clip(t, 0.0, 1.0), dtype=float)
    inner = (t > 0.0) & (t < 1.0)
    if np.any(inner):
        ti = t[inner]
        f0 = np.exp(-1.0 / ti)
        f1 = np.exp(-1.0 / (1.0 - ti))
        out[inner] = f0 / (f0 + f1)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BoundaryAngle:
    """Angle ``phi0`` of the condition ``u(0) sin(phi0) - v(0) cos(phi0) = 0``."""

    phi0: float

    def __post_init__(self):
        if not (0.0 <= self.phi0 < math.pi):
            raise ParameterError(f"boundary angle {self.phi0!r} not in [0, pi)")

    @classmethod
    def normalized(cls, angle: float, unit: str = "rad") -> "BoundaryAngle":
        """Fold an angle in radians or degrees into ``[0, pi)``."""
        if unit in ("deg", "degrees"):
            angle = math.radians(angle)
        elif unit not in ("rad", "radians"):
            raise ParameterError(f"unknown angle unit {unit!r}")
        folded = math.fmod(angle, math.pi)
        if folded < 0.0:
            folded += math.pi
        if folded >= math.pi:
            folded = 0.0
        return cls(folded)

    def __float__(self):
        return self.phi0


@dataclass(frozen=True)
class EigenTarget:
    """Target eigenvalue together with the boundary angle its solution starts at."""

    lambda_j: float
    theta_j: BoundaryAngle

    @classmethod
    def of(cls, lambda_j: float, theta_j: float) -> "EigenTarget":
        return cls(float(lambda_j), BoundaryAngle.normalized(theta_j))


def validate_targets(targets: Sequence[EigenTarget], lam: float | None = None) -> None:
    """Raise if target eigenvalues repeat or collide with ``lam``."""
    seen = set()
    for t in targets:
        if t.lambda_j in seen:
            raise DegenerateTargetError(f"duplicate target eigenvalue {t.lambda_j}")
        seen.add(t.lambda_j)
    if lam is not None and lam in seen:
        raise DegenerateTargetError(
            f"locked eigenvalue {lam} coincides with a target; need lambda != lambda_j"
        )


class SegmentKind(str, Enum):
    ZERO = "zero"
    COULOMB = "coulomb"
    BUMP = "bump"
    STAIRCASE = "staircase"


@dataclass(frozen=True)
class PotentialSegment:
    """One piece of a potential on ``[x_lo, x_hi)``.

    ``amplitude`` is ``C`` in ``C / (1 + x - shift)`` for Coulomb and bump
    pieces and ``A + eps`` in ``(A + eps) / x`` for staircase steps.
    """

    x_lo: float
    x_hi: float
    kind: SegmentKind = SegmentKind.ZERO
    amplitude: float = 0.0
    shift: float = 0.0
    lock_lambda: float = 0.0
    phase_offset: float = 0.0
    anchor: float = 0.0
    delta: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.x_lo < self.x_hi):
            raise ParameterError(f"bad segment interval [{self.x_lo}, {self.x_hi})")
        if self.kind in (SegmentKind.COULOMB, SegmentKind.BUMP) and not self.shift < self.x_lo + 1.0:
            raise ParameterError("Coulomb segments need 1 + x_lo - b > 0")
        if self.kind is SegmentKind.STAIRCASE and self.x_lo <= 0.0:
            raise ParameterError("staircase steps need x_lo > 0")
        if self.kind is SegmentKind.BUMP:
            if not math.isfinite(self.x_hi):
                raise ParameterError("bump segments must be bounded")
            if not (0.0 < self.delta <= 0.5 * (self.x_hi - self.x_lo)):
                raise ParameterError(f"collar width {self.delta} incompatible with interval")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, x_lo, x_hi=math.inf):
        return cls(float(x_lo), float(x_hi))

    @classmethod
    def coulomb(cls, x_lo, x_hi, amplitude, shift, lock_lambda, phase_offset, anchor):
        return cls(float(x_lo), float(x_hi), SegmentKind.COULOMB, float(amplitude),
                   float(shift), float(lock_lambda), float(phase_offset), float(anchor))

    @classmethod
    def bump(cls, x_lo, x_hi, amplitude, shift, lock_lambda, phase_offset, delta):
        return cls(float(x_lo), float(x_hi), SegmentKind.BUMP, float(amplitude),
                   float(shift), float(lock_lambda), float(phase_offset), float(x_lo),
                   float(delta))

    @classmethod
    def staircase(cls, x_lo, x_hi, base, eps, lock_lambda, phase_offset):
        return cls(float(x_lo), float(x_hi), SegmentKind.STAIRCASE, float(base + eps),
                   0.0, float(lock_lambda), float(phase_offset), 0.0, 0.0, float(eps))

    # -- evaluation ---------------------------------------------------------
    @property
    def pole(self) -> float:
        """Location ``s`` of the singularity of ``amplitude / (x - s)``."""
        if self.kind is SegmentKind.STAIRCASE:
            return 0.0
        return self.shift - 1.0

    @property
    def is_zero(self) -> bool:
        return self.kind is SegmentKind.ZERO or self.amplitude == 0.0

    def kernel_row(self) -> list[float]:
        amp = 0.0 if self.kind is SegmentKind.ZERO else self.amplitude
        kappa = 0.0 if self.kind is SegmentKind.ZERO else self.lock_lambda
        offset = 0.0 if self.kind is SegmentKind.ZERO else self.phase_offset
        return [amp, self.pole, self.delta, self.x_lo, self.x_hi, kappa, self.anchor, offset]

    def envelope(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is SegmentKind.ZERO:
            return np.zeros_like(x)
        V = self.amplitude / (x - self.pole)
        if self.kind is SegmentKind.BUMP:
            V = V * smooth_step((x - self.x_lo) / self.delta)
            V = V * smooth_step((self.x_hi - x) / self.delta)
        return V

    def phase(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is SegmentKind.ZERO:
            return np.zeros_like(x)
        return -2.0 * self.lock_lambda * (x - self.anchor) + 2.0 * self.phase_offset

    def phase_slope(self) -> float:
        return 0.0 if self.kind is SegmentKind.ZERO else -2.0 * self.lock_lambda

    def mesh_points(self) -> list[float]:
        """Interior points where the envelope changes formula (bump collars)."""
        if self.kind is SegmentKind.BUMP:
            return [self.x_lo + self.delta, self.x_hi - self.delta]
        return []

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value, "x_lo": self.x_lo, "x_hi": self.x_hi,
            "amplitude": self.amplitude, "shift": self.shift,
            "lock_lambda": self.lock_lambda, "phase_offset": self.phase_offset,
            "anchor": self.anchor, "delta": self.delta, "eps": self.eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSegment":
        d = dict(d)
        d["kind"] = SegmentKind(d["kind"])
        return cls(**d)


@dataclass(frozen=True)
class PotentialSpec:
    """Contiguous, non-overlapping list of segments."""

    segments: tuple[PotentialSegment, ...]
    _rows: np.ndarray = field(init=False, repr=False, compare=False)
    _starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ParameterError("a potential needs at least one segment")
        for left, right in zip(segs, segs[1:]):
            if left.x_hi != right.x_lo:
                raise ParameterError(
                    f"segments not contiguous at {left.x_hi} / {right.x_lo}"
                )
        object.__setattr__(self, "segments", segs)
        rows = np.array([s.kernel_row() for s in segs], dtype=float)
        rows.setflags(write=False)
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_starts", rows[:, 3].copy())

    @classmethod
    def from_segments(cls, segments: Iterable[PotentialSegment]) -> "PotentialSpec":
        """Sort segments, fill gaps (and ``[0, first)``, ``[last, inf)``) with zeros."""
        segs = sorted(segments, key=lambda s: s.x_lo)
        out: list[PotentialSegment] = []
        cursor = 0.0
        for s in segs:
            if s.x_lo < cursor:
                raise ParameterError(f"overlapping segment at {s.x_lo}")
            if s.x_lo > cursor:
                out.append(PotentialSegment.zero(cursor, s.x_lo))
            out.append(s)
            cursor = s.x_hi
        if math.isfinite(cursor):
            out.append(PotentialSegment.zero(cursor))
        return cls(tuple(out))

    @property
    def x_min(self) -> float:
        return self.segments[0].x_lo

    @property
    def x_max(self) -> float:
        return self.segments[-1].x_hi

    def kernel_rows(self) -> np.ndarray:
        return self._rows

    def index_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(~(x >= self.x_min)) or np.any(~(x < self.x_max)):
            bad = x[(~(x >= self.x_min)) | (~(x < self.x_max))]
            raise DomainError(
                f"x={bad.ravel()[0]!r} outside coverage [{self.x_min}, {self.x_max})"
            )
        return np.searchsorted(self._starts, x, side="right") - 1

    def segment_at(self, x: float) -> PotentialSegment:
        return self.segments[int(self.index_of(x))]

    def _evaluate(self, x, method):
        xa = np.asarray(x, dtype=float)
        idx = self.index_of(xa)
        out = np.empty_like(xa)
        for i in np.unique(idx):
            m = idx == i
            out[m] = getattr(self.segments[i], method)(xa[m])
        return out if out.ndim else float(out)

    def V(self, x):
        return self._evaluate(x, "envelope")

    def phi(self, x):
        return self._evaluate(x, "phase")

    def polar_at(self, x):
        return self.V(x), self.phi(x)

    def pq_at(self, x):
        """Return ``(p, q)`` at ``x``."""
        return polar_to_pq(*self.polar_at(x))

    def envelope(self, x):
        """``sqrt(p**2 + q**2)`` computed from ``pq_at``."""
        p, q = self.pq_at(x)
        return np.hypot(p, q)

    def pieces(self, x_start: float, x_end: float) -> Iterator[tuple[PotentialSegment, float, float]]:
        """Yield ``(segment, a, b)`` for every segment overlapping ``[x_start, x_end]``."""
        if x_end < x_start:
            raise ParameterError("span must be increasing")
        self.index_of(x_start)
        if x_end > self.x_max or (x_end == self.x_max and not math.isfinite(x_end)):
            raise DomainError(f"x={x_end!r} outside coverage")
        for s in self.segments:
            if s.x_hi <= x_start or s.x_lo >= x_end:
                continue
            yield s, max(s.x_lo, x_start), min(s.x_hi, x_end)

    def to_dict(self) -> dict:
        return {"segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        return cls(tuple(PotentialSegment.from_dict(s) for s in d["segments"]))
