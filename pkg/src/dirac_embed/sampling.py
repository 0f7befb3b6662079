"""Seeded random potentials for cross-checks and property tests."""
from __future__ import annotations

import math

import numpy as np

from .potential import PotentialSegment, PotentialSpec


def random_coulomb_spec(
    rng: np.random.Generator,
    span: tuple[float, float],
    amp_max: float,
    n_segments: int = 6,
    lam: float | None = None,
    lock_prob: float = 0.3,
    bump_prob: float = 0.0,
) -> PotentialSpec:
    """Piecewise Coulomb profile ``C_k/(1+x)`` with random linear phases.

    Every amplitude is at most ``amp_max`` so ``(1+x) V(x) <= amp_max``
    everywhere.  With probability ``lock_prob`` a segment is phase-locked to
    ``lam`` (the worst case for decay), otherwise its phase slope is drawn
    from ``[-8, 8]``.  With probability ``bump_prob`` a segment is a smoothed
    bump instead of a hard-edged piece.
    """
    lo, hi = float(span[0]), float(span[1])
    cuts = np.sort(rng.uniform(lo, hi, n_segments - 1))
    edges = np.concatenate([[lo], cuts, [hi]])
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-6:
            continue
        amp = float(rng.uniform(0.0, amp_max))
        offset = float(rng.uniform(0.0, math.pi))
        if lam is not None and rng.uniform() < lock_prob:
            kappa = float(lam)
        else:
            kappa = float(rng.uniform(-8.0, 8.0))
        hi_seg = math.inf if b == hi and hi == math.inf else float(b)
        if rng.uniform() < bump_prob and math.isfinite(hi_seg):
            delta = min(1.0, 0.5 * (hi_seg - a))
            segs.append(PotentialSegment.bump(float(a), hi_seg, amp, 0.0, kappa, offset, delta))
        else:
            segs.append(PotentialSegment.coulomb(float(a), hi_seg, amp, 0.0, kappa, offset, float(a)))
    return PotentialSpec.from_segments(segs)
