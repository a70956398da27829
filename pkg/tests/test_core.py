"""Moebius algebra, hyperbolic geometry, and polar grid contracts."""

from __future__ import annotations

import math

import numpy as np
import pytest

from loewnerqc.core import (
    INFINITY,
    BeckerDisk,
    HalfPlaneChart,
    MobiusTransform,
    PolarGrid,
    becker_disk_contains,
    cross_ratio,
    halfplane_chart,
    hyperbolic_distance_disk,
    hyperbolic_distance_halfplane,
    is_infinity,
    mobius_eval,
)
from loewnerqc.errors import DegenerateChartError, DomainError, ValidationError

RNG = np.random.default_rng(20260816)


def _random_mobius(rng):
    while True:
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        if abs(a * d - b * c) > 1e-3:
            return MobiusTransform(a, b, c, d)


def test_mobius_identity_and_apply():
    m = MobiusTransform.identity()
    zs = RNG.normal(size=16) + 1j * RNG.normal(size=16)
    assert np.max(np.abs(m.apply(zs) - zs)) == 0.0
    assert m(2.0 + 1.0j) == 2.0 + 1.0j


def test_mobius_compose_and_inverse_roundtrip():
    rng = np.random.default_rng(7)
    zs = 0.7 * (rng.normal(size=32) + 1j * rng.normal(size=32))
    for _ in range(8):
        m = _random_mobius(rng)
        n = _random_mobius(rng)
        lhs = m.compose(n).apply(zs)
        rhs = m.apply(n.apply(zs))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(lhs) + 1.0)
        back = m.inverse().apply(m.apply(zs))
        assert np.max(np.abs(back - zs)) <= 1e-10


def test_mobius_degenerate_coefficients_rejected():
    with pytest.raises(ValidationError):
        MobiusTransform(1.0, 2.0, 2.0, 4.0)
    with pytest.raises(ValidationError):
        MobiusTransform(0.0, 0.0, 0.0, 0.0)


def test_mobius_infinity_semantics():
    m = MobiusTransform(1.0, 0.0, 1.0, -1.0)  # z / (z - 1)
    assert mobius_eval(m, 1.0) is INFINITY
    assert m(INFINITY) == 1.0
    assert is_infinity(MobiusTransform.identity()(INFINITY))


def test_from_three_points_hits_targets():
    rng = np.random.default_rng(11)
    for _ in range(6):
        src = rng.normal(size=3) + 1j * rng.normal(size=3)
        dst = rng.normal(size=3) + 1j * rng.normal(size=3)
        m = MobiusTransform.from_three_points(src, dst)
        assert np.max(np.abs(m.apply(src) - dst)) <= 1e-9
    with pytest.raises(ValidationError):
        MobiusTransform.from_three_points([0, 0, 1], [0, 1, 2])


def test_cross_ratio_mobius_invariance():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=4) + 1j * rng.normal(size=4)
    base = cross_ratio(*pts)
    for _ in range(8):
        m = _random_mobius(rng)
        imgs = [m(p) for p in pts]
        assert abs(cross_ratio(*imgs) - base) <= 1e-9 * max(1.0, abs(base))
    with pytest.raises(ValidationError):
        cross_ratio(1.0, 2.0, 1.0, 1.0)


def test_disk_automorphism_and_cayley():
    c = 0.3 - 0.4j
    m = MobiusTransform.disk_automorphism(c)
    assert abs(m(c)) <= 1e-15
    assert abs(m(0.0) + c) <= 1e-15
    # boundary goes to boundary
    ring = np.exp(2j * np.pi * np.arange(32) / 32)
    assert np.max(np.abs(np.abs(m.apply(ring)) - 1.0)) <= 1e-12
    with pytest.raises(ValidationError):
        MobiusTransform.disk_automorphism(1.0)
    cay = MobiusTransform.cayley()
    assert cay(0.0) == 1.0
    inner = 0.9 * ring * np.exp(0.1j)
    assert np.min(cay.apply(inner).real) > 0.0


def test_halfplane_chart_roundtrip_and_center():
    chart = HalfPlaneChart(2.0 + 0.5j)
    assert abs(chart.forward(0.0) - (2.0 + 0.5j)) <= 1e-15
    zs = 0.8 * (np.exp(2j * np.pi * np.arange(16) / 16))
    assert np.max(np.abs(chart.inverse(chart.forward(zs)) - zs)) <= 1e-12
    assert np.min(chart.forward(zs).real) > 0.0
    assert halfplane_chart(1.0).forward(0.0) == 1.0
    with pytest.raises(DegenerateChartError):
        HalfPlaneChart(-1.0 + 2.0j)


def test_becker_disk_membership_and_margin():
    disk = BeckerDisk(0.5)
    assert disk.contains(1.0)
    assert disk.margin(1.0) == -1.0  # |0| - k |2|
    assert becker_disk_contains(disk, 1.0)
    # real boundary points (1 +- k) / (1 -+ k)
    for w in (3.0, 1.0 / 3.0):
        assert abs(disk.margin(w)) <= 1e-12
    assert not disk.contains(4.0)
    assert disk.hyperbolic_radius == pytest.approx(math.atanh(0.5), abs=1e-15)
    with pytest.raises(ValidationError):
        BeckerDisk(1.0)
    with pytest.raises(ValidationError):
        BeckerDisk(-0.1)


def test_becker_disk_equals_hyperbolic_ball():
    # U(k) is the hyperbolic ball about 1 of radius artanh(k)
    disk = BeckerDisk(0.4)
    rng = np.random.default_rng(5)
    ws = np.abs(rng.normal(size=64, scale=1.5)) + 1e-3 \
        + 1j * rng.normal(size=64)
    for w in ws:
        inside = hyperbolic_distance_halfplane(w, 1.0) \
            <= disk.hyperbolic_radius + 1e-12
        assert inside == disk.contains(w) or abs(disk.margin(w)) <= 1e-9


def test_hyperbolic_distances():
    assert hyperbolic_distance_disk(0.0, 0.5) == pytest.approx(
        math.atanh(0.5), abs=1e-15)
    assert hyperbolic_distance_halfplane(1.0, 3.0) == pytest.approx(
        0.5 * math.log(3.0), abs=1e-12)
    # Cayley transport preserves the metric
    cay = MobiusTransform.cayley()
    z1, z2 = 0.2 + 0.1j, -0.3 + 0.4j
    assert hyperbolic_distance_halfplane(cay(z1), cay(z2)) == pytest.approx(
        hyperbolic_distance_disk(z1, z2), abs=1e-12)
    with pytest.raises(DomainError):
        hyperbolic_distance_disk(0.0, 1.5)
    with pytest.raises(DomainError):
        hyperbolic_distance_halfplane(-1.0, 1.0)


def test_polar_grid_layout():
    grid = PolarGrid((0.5, 1.5), 8)
    assert grid.angles.shape == (8,)
    assert grid.angles[1] == pytest.approx(2.0 * np.pi / 8.0, abs=1e-15)
    nodes = grid.nodes()
    assert nodes.shape == (2, 8)
    assert abs(nodes[1, 0] - 1.5) <= 1e-15
    assert np.max(np.abs(grid.circle(1.5) - nodes[1])) == 0.0


def test_polar_grid_validation():
    with pytest.raises(ValidationError):
        PolarGrid((), 8)
    with pytest.raises(ValidationError):
        PolarGrid((0.5, 0.5), 8)
    with pytest.raises(ValidationError):
        PolarGrid((-0.1, 0.5), 8)
    with pytest.raises(ValidationError):
        PolarGrid((0.5,), 12)
