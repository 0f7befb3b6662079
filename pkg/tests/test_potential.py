import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirac_embed.errors import DegenerateTargetError, DomainError, ParameterError
from dirac_embed.potential import (BoundaryAngle, EigenTarget, PotentialSegment, PotentialSpec,
                                   SegmentKind, polar_to_pq, smooth_step, validate_targets)
from dirac_embed.sampling import random_coulomb_spec


@pytest.mark.parametrize("V, phi, expected", [
    (1.0, 0.0, (0.0, 1.0)),
    (0.0, 1.234, (0.0, 0.0)),
    (2.0, math.pi / 2, (2.0, 0.0)),
])
def test_polar_to_pq_examples(V, phi, expected):
    p, q = polar_to_pq(V, phi)
    assert p == pytest.approx(expected[0], abs=1e-15)
    assert q == pytest.approx(expected[1], abs=1e-15)


def test_polar_to_pq_arrays():
    p, q = polar_to_pq(np.array([1.0, 2.0]), np.array([0.0, math.pi / 2]))
    assert np.allclose(p, [0.0, 2.0]) and np.allclose(q, [1.0, 0.0])


def test_boundary_angle_range():
    assert BoundaryAngle(0.0).phi0 == 0.0
    with pytest.raises(ParameterError):
        BoundaryAngle(math.pi)
    with pytest.raises(ParameterError):
        BoundaryAngle(-0.1)


@pytest.mark.parametrize("angle, unit, expected", [
    (190.0, "deg", math.radians(10.0)),
    (-30.0, "deg", math.radians(150.0)),
    (math.pi + 0.25, "rad", 0.25),
    (3 * math.pi, "rad", 0.0),
    (0.5, "radians", 0.5),
])
def test_boundary_angle_normalized(angle, unit, expected):
    assert BoundaryAngle.normalized(angle, unit).phi0 == pytest.approx(expected, abs=1e-12)


def test_boundary_angle_bad_unit():
    with pytest.raises(ParameterError):
        BoundaryAngle.normalized(1.0, "grad")


def test_targets_distinct():
    validate_targets([EigenTarget.of(1, 0.1), EigenTarget.of(2, 0.1)])
    with pytest.raises(DegenerateTargetError):
        validate_targets([EigenTarget.of(1, 0.1), EigenTarget.of(1, 0.5)])
    with pytest.raises(DegenerateTargetError):
        validate_targets([EigenTarget.of(1, 0.1)], lam=1.0)


def test_smooth_step_limits():
    assert smooth_step(-1.0) == 0.0 and smooth_step(0.0) == 0.0
    assert smooth_step(1.0) == 1.0 and smooth_step(3.0) == 1.0
    assert smooth_step(0.5) == pytest.approx(0.5)
    t = np.linspace(0.01, 0.99, 50)
    assert np.all(np.diff(smooth_step(t)) > 0)


def test_coulomb_segment_formula():
    seg = PotentialSegment.coulomb(0.0, math.inf, 2.0, 0.0, 1.0, 0.7, 0.0)
    x = np.array([0.0, 1.0, 9.0])
    assert np.allclose(seg.envelope(x), 2.0 / (1.0 + x), rtol=0, atol=1e-15)
    assert np.allclose(seg.phase(x), -2.0 * x + 1.4, rtol=0, atol=1e-15)


def test_staircase_segment_formula():
    seg = PotentialSegment.staircase(math.e ** 8, math.e ** 27, 0.5, 0.25, 1.0, 0.3)
    x = math.e ** 10
    assert seg.envelope(x) == pytest.approx(0.75 / x, rel=1e-15)
    with pytest.raises(ParameterError):
        PotentialSegment.staircase(0.0, 1.0, 0.5, 0.5, 1.0, 0.0)


def test_segment_validation():
    with pytest.raises(ParameterError):
        PotentialSegment.zero(2.0, 1.0)
    with pytest.raises(ParameterError):
        PotentialSegment.coulomb(0.0, 1.0, 1.0, 5.0, 0.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        PotentialSegment.bump(0.0, math.inf, 1.0, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        PotentialSegment.bump(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.8)


def test_bump_support_and_bound():
    seg = PotentialSegment.bump(10.0, 30.0, 5.0, 0.0, 1.0, 0.2, 2.0)
    x = np.linspace(10.0, 30.0, 4001)
    V = seg.envelope(x)
    assert V[0] == 0.0 and V[-1] == 0.0
    assert np.all(V * (1.0 + x) <= 5.0 * (1 + 1e-15))
    inner = (x >= 12.0) & (x <= 28.0)
    assert np.allclose(V[inner] * (1.0 + x[inner]), 5.0, rtol=1e-14)
    spec = PotentialSpec.from_segments([seg])
    outside = np.array([0.0, 5.0, 9.999, 30.0, 31.0, 1e6])
    assert np.all(spec.envelope(outside) == 0.0)


def test_bump_collar_smoothness():
    # one-sided finite differences of V at x0 shrink under refinement
    seg = PotentialSegment.bump(10.0, 30.0, 5.0, 0.0, 1.0, 0.2, 2.0)
    for order in range(1, 5):
        prev = None
        for h in (0.1, 0.05, 0.025, 0.0125):
            pts = 10.0 + h * np.arange(order + 1)
            coef = np.array([math.comb(order, k) * (-1) ** (order - k) for k in range(order + 1)])
            d = abs(coef @ seg.envelope(pts)) / h ** order
            if prev is not None:
                assert d < prev
            prev = d
        assert prev < 1e-6


def test_spec_fills_gaps_and_coverage():
    seg = PotentialSegment.coulomb(5.0, 10.0, 1.0, 0.0, 0.0, 0.0, 5.0)
    spec = PotentialSpec.from_segments([seg])
    kinds = [s.kind for s in spec.segments]
    assert kinds == [SegmentKind.ZERO, SegmentKind.COULOMB, SegmentKind.ZERO]
    assert spec.x_min == 0.0 and spec.x_max == math.inf
    assert spec.segment_at(7.0) is seg
    assert spec.segment_at(10.0).kind is SegmentKind.ZERO
    with pytest.raises(DomainError):
        spec.V(-1.0)


def test_spec_rejects_gaps():
    with pytest.raises(ParameterError):
        PotentialSpec((PotentialSegment.zero(0.0, 1.0), PotentialSegment.zero(2.0)))


def test_spec_roundtrip():
    seg = PotentialSegment.bump(10.0, 30.0, 5.0, 0.0, 1.0, 0.2, 2.0)
    spec = PotentialSpec.from_segments([seg])
    assert PotentialSpec.from_dict(spec.to_dict()) == spec


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_polar_identity_random_specs(seed):
    rng = np.random.default_rng(seed)
    spec = random_coulomb_spec(rng, (0.0, 200.0), 3.0, n_segments=5, lam=1.0, bump_prob=0.5)
    x = rng.uniform(0.0, 250.0, 10_000)
    V = spec.V(x)
    p, q = spec.pq_at(x)
    assert np.allclose(np.hypot(p, q), np.abs(V), rtol=1e-15, atol=1e-300)
    assert np.allclose(spec.envelope(x), np.abs(V), rtol=1e-15, atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_each_point_resolves_to_one_segment(seed):
    rng = np.random.default_rng(seed)
    spec = random_coulomb_spec(rng, (0.0, 50.0), 1.0, n_segments=6)
    x = rng.uniform(0.0, 100.0, 500)
    idx = spec.index_of(x)
    for xi, i in zip(x, idx):
        seg = spec.segments[i]
        assert seg.x_lo <= xi < seg.x_hi
