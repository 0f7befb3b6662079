"""Explicit potentials with embedded eigenvalues.

* :func:`make_supercritical` - ``V = A/(1+x)`` phase-locked to one eigenvalue.
* :func:`make_critical_staircase` - the borderline ``A = 1/2`` case built from
  steps ``(1/2 + 1/(2n))/x`` on ``[e^{n^3}, e^{(n+1)^3})``.
* :func:`make_bump` - compactly supported smoothed Coulomb piece.
* :func:`schedule_pieces` / :func:`assemble_multi` - round-robin chains of
  bumps giving several eigenvalues at once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (AdmissibilityError, ConsistencyError, ParameterError,
                     ScheduleError)
from .potential import (BoundaryAngle, EigenTarget, PotentialSegment, PotentialSpec,
                        validate_targets)
from .prufer import DEFAULT_TOL, PrueferTrajectory, integrate_prufer

__all__ = [
    "DEFAULT_C_AMP",
    "DECAY_EXPONENT",
    "ASSEMBLY_COLLAR_FRACTION",
    "BumpCertificateInputs",
    "Piece",
    "PieceSchedule",
    "MultiAssembly",
    "make_locked_coulomb",
    "make_supercritical",
    "make_critical_staircase",
    "critical_log_breakpoints",
    "k_gap_estimate",
    "make_bump",
    "piece_log_length",
    "amplitude_needed",
    "block_net_log_decay",
    "schedule_pieces",
    "assemble_multi",
]

DEFAULT_C_AMP = 110.0
DECAY_EXPONENT = 100.0
# worst non-target excursion 0.5*ln((w + 2V)/(w - 2V)) <= ln(4/3)  <=>  V <= (7/25)|dlambda|
_GAP_FRACTION = 7.0 / 25.0
# e^{(n+1)^3} must stay finite
_STAIRCASE_N_MAX = 8
ASSEMBLY_COLLAR_FRACTION = 0.02


def _angle(theta0) -> float:
    return theta0.phi0 if isinstance(theta0, BoundaryAngle) else float(theta0)


def make_locked_coulomb(lam: float, A: float, theta0, b: float = 0.0) -> PotentialSpec:
    """``V = A/(1+x-b)`` with phase ``-2 lam x + 2 theta0`` on ``[0, inf)``.

    No restriction on ``A``; used for sweeps across the 1/2 threshold.
    """
    if A < 0.0:
        raise ParameterError("amplitude must be non-negative")
    seg = PotentialSegment.coulomb(0.0, math.inf, A, b, lam, _angle(theta0), 0.0)
    return PotentialSpec((seg,))


def make_supercritical(lam: float, A: float, theta0) -> PotentialSpec:
    """Single-eigenvalue potential ``V = A/(1+x)``, ``phi = -2 lam x + 2 theta0``.

    The ``lam`` solution started at ``theta0`` keeps ``2 theta - phi = 0`` and
    decays like ``(1+x)^-A``, which is square integrable for ``A > 1/2``.
    """
    if not A > 0.5:
        raise ParameterError(
            f"A={A} must exceed 1/2; use make_critical_staircase for A = 1/2"
        )
    return make_locked_coulomb(lam, A, theta0)


def critical_log_breakpoints(n_max: int) -> list[float]:
    """``ln a_n = n**3`` for ``n = 1 .. n_max + 1``."""
    return [float(n ** 3) for n in range(1, n_max + 2)]


def make_critical_staircase(lam: float, theta0, n_max: int) -> PotentialSpec:
    """Borderline construction with ``limsup x V(x) = 1/2``.

    Steps ``V = (1/2 + 1/(2n))/x`` on ``[a_n, a_{n+1})``, ``a_n = e^{n^3}``, for
    ``n = 1 .. n_max``; the last step extends to infinity.  ``[0, a_1)`` carries
    the locked Coulomb profile ``1/(1+x)`` so the potential is bounded at 0.
    """
    if not 1 <= n_max <= _STAIRCASE_N_MAX:
        raise ParameterError(
            f"n_max must lie in 1..{_STAIRCASE_N_MAX} (e^(n^3) overflows beyond)"
        )
    th = _angle(theta0)
    # a_{n_max+1} is not needed: the last step runs to infinity
    a = [math.exp(v) for v in critical_log_breakpoints(n_max)[:n_max]]
    segs = [PotentialSegment.coulomb(0.0, a[0], 0.5 + 0.5, 0.0, lam, th, 0.0)]
    for n in range(1, n_max + 1):
        hi = a[n] if n < n_max else math.inf
        segs.append(PotentialSegment.staircase(a[n - 1], hi, 0.5, 1.0 / (2 * n), lam, th))
    return PotentialSpec(tuple(segs))


@dataclass(frozen=True)
class BumpCertificateInputs:
    x0: float
    x1: float
    b: float = 0.0
    C_amp: float = DEFAULT_C_AMP
    K_gap: float = 0.0

    def __post_init__(self):
        if not self.x1 > self.x0 > self.b:
            raise ParameterError(f"need x1 > x0 > b, got {self.x1}, {self.x0}, {self.b}")
        if not self.x0 - self.b > self.K_gap:
            raise AdmissibilityError(
                f"x0 - b = {self.x0 - self.b:g} does not exceed K_gap = {self.K_gap:g}"
            )


def k_gap_estimate(lam: float, others: Iterable[float], C_amp: float = DEFAULT_C_AMP) -> float:
    """Smallest ``x0 - b`` at which every non-target solution stays within 4/3.

    For a frozen envelope ``V`` the non-target log-amplitude oscillates with
    peak-to-peak size ``0.5 ln((w + 2V)/(w - 2V))``, ``w = 2|lam - lam_j|``.
    Keeping that below ``ln(4/3)`` needs ``V <= (7/25)|lam - lam_j|``.
    """
    gaps = [abs(lam - o) for o in others]
    if not gaps:
        return 0.0
    return C_amp / (_GAP_FRACTION * min(gaps))


def make_bump(
    lam: float,
    S: Sequence[EigenTarget],
    inputs: BumpCertificateInputs,
    phi0: float,
    delta: float | None = None,
) -> PotentialSegment:
    """Smoothed Coulomb piece supported in ``[x0, x1]`` locked to ``lam``.

    ``phi0`` is the Prüfer angle of the ``lam`` solution at ``x0``; pass the
    unreduced value when chaining pieces so the lock is exact.
    """
    validate_targets(S, lam)
    width = inputs.x1 - inputs.x0
    if delta is None:
        delta = min(1.0, width / 10.0)
    if not 0.0 < delta <= width / 10.0:
        raise ParameterError(f"smoothing width {delta} must lie in (0, (x1-x0)/10]")
    return PotentialSegment.bump(inputs.x0, inputs.x1, inputs.C_amp, inputs.b, lam,
                                 float(phi0), delta)


# -- scheduling -------------------------------------------------------------

def piece_log_length(n_active: int) -> float:
    """Log-length of one piece: enough decay to beat ``N - 1`` factors of 2."""
    return max(1.0, n_active * math.log(2.0) / 50.0)


def amplitude_needed(n_active: int, C_amp: float = DEFAULT_C_AMP) -> float:
    """Amplitude keeping every target's mean decay rate >= 1 per unit ``ln x``.

    A target decays by ``C L`` in its own piece and may grow by ``ln 2`` in
    each of the other ``N - 1``; ``(C L - (N-1) ln 2) / (N L) >= 1`` gives the
    bound below.  Never less than ``C_amp``.
    """
    L = piece_log_length(n_active)
    return max(C_amp, n_active + (n_active - 1) * math.log(2.0) / L)


@dataclass(frozen=True)
class Piece:
    log_lo: float
    log_hi: float
    target: int
    n_active: int
    amplitude: float
    block: int

    @property
    def x_lo(self) -> float:
        return math.exp(self.log_lo)

    @property
    def x_hi(self) -> float:
        return math.exp(self.log_hi)


@dataclass(frozen=True)
class PieceSchedule:
    """Ordered bump intervals with their target index (0-based) and ``N_r``."""

    pieces: tuple[Piece, ...]
    b: float = 0.0
    h: Callable[[float], float] | None = field(default=None, compare=False)

    def blocks(self) -> list[list[Piece]]:
        return [list(g) for _, g in itertools.groupby(self.pieces, key=lambda p: p.block)]

    @property
    def n_targets(self) -> int:
        return max((p.n_active for p in self.pieces), default=0)

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "pieces": [
                {"log_lo": p.log_lo, "log_hi": p.log_hi, "target": p.target,
                 "n_active": p.n_active, "amplitude": p.amplitude, "block": p.block}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PieceSchedule":
        return cls(tuple(Piece(**p) for p in d["pieces"]), float(d.get("b", 0.0)))


def block_net_log_decay(block: Sequence[Piece]) -> float:
    """``-100 * (block log-length) / N + (N - 1) ln 2`` for one block."""
    n = block[0].n_active
    length = sum(p.log_hi - p.log_lo for p in block)
    return -DECAY_EXPONENT * length / n + (n - 1) * math.log(2.0)


def schedule_pieces(
    S: Iterable[EigenTarget],
    h: Callable[[float], float] | None = None,
    x_start: float = 300.0,
    sigma_policy: Callable[[int], float] = piece_log_length,
    n_blocks: int = 3,
    n_targets: int | None = None,
    C_amp: float = DEFAULT_C_AMP,
    b: float = 0.0,
    log_x_limit: float = 700.0,
) -> PieceSchedule:
    """Round-robin piece layout.

    Without ``h`` all of ``S`` (finite) is active from the first piece and
    ``n_blocks`` blocks are emitted.  With ``h`` the active count starts at 0
    and grows by one per block, only once ``h(x)`` covers the amplitude the
    larger set needs and ``x`` clears its admissibility gap; ``n_blocks``
    blocks follow after the first ``n_targets`` targets of ``S`` are active.
    """
    if x_start <= 0.0:
        raise ParameterError("x_start must be positive")
    if h is None:
        targets = list(S)
        if not targets:
            raise ParameterError("empty target set")
        validate_targets(targets)
        n = len(targets)
        L = sigma_policy(n)
        amp = amplitude_needed(n, C_amp)
        log_x = math.log(x_start)
        pieces = []
        for blk in range(n_blocks):
            for j in range(n):
                pieces.append(Piece(log_x, log_x + L, j, n, amp, blk))
                log_x += L
        return PieceSchedule(tuple(pieces), b)

    if n_targets is None:
        if not isinstance(S, Sequence):
            raise ParameterError("n_targets is required for an unbounded target stream")
        n_targets = len(S)
    targets = list(itertools.islice(iter(S), n_targets))
    if len(targets) < n_targets:
        raise ParameterError(f"only {len(targets)} targets available, {n_targets} requested")
    validate_targets(targets)

    def admissible(log_x: float, n: int) -> bool:
        lams = [t.lambda_j for t in targets[:n]]
        amp = amplitude_needed(n, C_amp)
        need = max(k_gap_estimate(l, [o for o in lams if o != l], amp) for l in lams)
        return math.exp(log_x) - b > need

    pieces = []
    log_x = math.log(x_start)
    n = 0
    blk = 0
    blocks_after = 0
    while blocks_after < n_blocks:
        if log_x > log_x_limit:
            raise ScheduleError(
                f"growth budget h fails at x = e^{log_x:.1f}: only {n} of "
                f"{n_targets} targets admitted"
            )
        x = math.exp(log_x)
        if n < n_targets and h(x) >= amplitude_needed(n + 1, C_amp) and admissible(log_x, n + 1):
            n += 1
        if n == 0:
            log_x += 1.0
            continue
        L = sigma_policy(n)
        amp = amplitude_needed(n, C_amp)
        for j in range(n):
            pieces.append(Piece(log_x, log_x + L, j, n, amp, blk))
            log_x += L
        blk += 1
        if n == n_targets:
            blocks_after += 1
    return PieceSchedule(tuple(pieces), b, h)


# -- assembly ---------------------------------------------------------------

@dataclass(frozen=True)
class MultiAssembly:
    """Assembled potential plus the target trajectories used to phase-match it."""

    spec: PotentialSpec
    schedule: PieceSchedule
    targets: tuple[EigenTarget, ...]
    trajectories: tuple[PrueferTrajectory, ...]
    envelope_constant: float
    K_gaps: tuple[float, ...]

    @property
    def span(self) -> tuple[float, float]:
        return 0.0, self.schedule.pieces[-1].x_hi


def _concat(parts: list[PrueferTrajectory], lam: float, theta0: float) -> PrueferTrajectory:
    x = np.concatenate([parts[0].x] + [p.x[1:] for p in parts[1:]])
    lnR = np.concatenate([parts[0].lnR] + [p.lnR[1:] for p in parts[1:]])
    theta = np.concatenate([parts[0].theta] + [p.theta[1:] for p in parts[1:]])
    sl = np.concatenate([p.slopes_lnR for p in parts])
    st = np.concatenate([p.slopes_theta for p in parts])
    dn = np.concatenate([p.dense for p in parts])
    for arr in (x, lnR, theta, sl, st, dn):
        arr.setflags(write=False)
    return PrueferTrajectory(lam, theta0, x, lnR, theta, sl, st, dn)


def assemble_multi(
    S: Sequence[EigenTarget],
    schedule: PieceSchedule,
    C_amp: float | None = None,
    K_gap: float | None = None,
    b: float | None = None,
    tol: float = DEFAULT_TOL,
    backend: str | None = None,
    collar_fraction: float = ASSEMBLY_COLLAR_FRACTION,
) -> MultiAssembly:
    """Chain one bump per scheduled piece, each locked to that piece's target.

    Each bump's phase offset is the target's Prüfer angle at the piece start,
    obtained by integrating that target through all earlier pieces.
    ``C_amp`` overrides the per-piece amplitude; ``K_gap`` overrides the
    per-piece admissibility threshold from :func:`k_gap_estimate`.
    Collars are ``collar_fraction`` of each piece width: a unit collar
    leaves non-target solutions a net change of order 1e-3 per piece, a
    collar this wide makes it smaller than the integration error.
    """
    targets = tuple(S)
    validate_targets(targets)
    if not schedule.pieces:
        raise ConsistencyError("empty schedule")
    if schedule.n_targets > len(targets) or any(
        not 0 <= p.target < p.n_active for p in schedule.pieces
    ):
        raise ConsistencyError("schedule refers to targets outside S")
    b = schedule.b if b is None else float(b)

    x_first = schedule.pieces[0].x_lo
    lead = PotentialSpec((PotentialSegment.zero(0.0, x_first),))
    parts = [[integrate_prufer(lead, t.lambda_j, t.theta_j, (0.0, x_first), tol=tol,
                               backend=backend)] for t in targets]
    segments = [lead.segments[0]]
    gaps = []
    env_const = 0.0
    for piece in schedule.pieces:
        active = [t.lambda_j for t in targets[: piece.n_active]]
        lam = targets[piece.target].lambda_j
        amp = piece.amplitude if C_amp is None else float(C_amp)
        gap = k_gap_estimate(lam, [o for o in active if o != lam], amp) if K_gap is None else K_gap
        gaps.append(gap)
        inputs = BumpCertificateInputs(piece.x_lo, piece.x_hi, b, amp, gap)
        theta_here = float(parts[piece.target][-1].theta[-1])
        seg = make_bump(lam, [t for t in targets[: piece.n_active] if t.lambda_j != lam],
                        inputs, theta_here, collar_fraction * (piece.x_hi - piece.x_lo))
        segments.append(seg)
        env_const = max(env_const, amp * (1.0 + seg.x_lo) / (1.0 + seg.x_lo - b))
        local = PotentialSpec((seg,))
        for k, t in enumerate(targets):
            prev = parts[k][-1]
            parts[k].append(integrate_prufer(local, t.lambda_j, float(prev.theta[-1]),
                                             (seg.x_lo, seg.x_hi), tol=tol,
                                             lnR0=float(prev.lnR[-1]), backend=backend))
    segments.append(PotentialSegment.zero(segments[-1].x_hi))
    spec = PotentialSpec(tuple(segments))
    trajs = tuple(_concat(parts[k], t.lambda_j, t.theta_j.phi0) for k, t in enumerate(targets))
    return MultiAssembly(spec, schedule, targets, trajs, env_const, tuple(gaps))
