"""Herglotz function catalog, coefficient tables, driving specs, parsing."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from loewnerqc.errors import (
    DomainError,
    InvalidRhoError,
    SingularValueError,
    TableRangeError,
    ValidationError,
)
from loewnerqc.herglotz import (
    CenterTrajectory,
    CoefficientTableHerglotz,
    ConditionSampling,
    ConstantHerglotz,
    KoebeHerglotz,
    RhoSpec,
    UserHerglotz,
    catalog_herglotz,
    check_becker_condition,
    check_weaker_condition,
    default_condition_sampling,
    essential_example_driving,
    lambda_slice,
    parse_driving_spec,
    parse_herglotz_spec,
    rho_catalog,
    sigma_herglotz,
    validate_herglotz_spec,
)

RNG = np.random.default_rng(20260816)
ZS = 0.85 * np.sqrt(RNG.uniform(0.1, 1.0, size=24)) \
    * np.exp(2j * np.pi * RNG.uniform(size=24))


def test_constant_herglotz_values():
    p = ConstantHerglotz(1.0 - 2.0j)
    vals = p.p(ZS, 0.7)
    assert np.max(np.abs(vals - (1.0 - 2.0j))) == 0.0
    assert np.max(np.abs(p.p_dz(ZS, 0.0))) == 0.0
    assert complex(p.p(0.2 + 0.0j, 0.0)) == 1.0 - 2.0j


def test_koebe_herglotz_closed_form():
    k = 0.5
    p = KoebeHerglotz(k)
    want = (1.0 - k * ZS) / (1.0 + k * ZS)
    assert np.max(np.abs(p.p(ZS, 0.0) - want)) <= 1e-14
    # n = 2 member
    p2 = catalog_herglotz("koebe", k=k, n=2)
    want2 = (1.0 - k * ZS ** 2) / (1.0 + k * ZS ** 2)
    assert np.max(np.abs(p2.p(ZS, 1.3) - want2)) <= 1e-14
    # derivative against a finite difference
    h = 1e-6
    fd = (p.p(ZS + h, 0.0) - p.p(ZS - h, 0.0)) / (2.0 * h)
    assert np.max(np.abs(p.p_dz(ZS, 0.0) - fd)) <= 1e-7


def test_sigma_herglotz_quotient_property():
    sigma = 1.5
    p = sigma_herglotz(sigma)
    # at t = 0 the function is the constant (2 - sigma) / sigma
    assert abs(complex(p.p(0.0 + 0.0j, 0.0))
               - (2.0 - sigma) / sigma) <= 1e-12
    report = validate_herglotz_spec(p)
    assert report.satisfied, report.notes
    # Becker quotient has constant modulus |sigma - 1| on the circle
    ring = np.exp(2j * np.pi * np.arange(64) / 64)
    for t in (0.0, 0.5, 2.0):
        vals = p.p(0.999999 * ring, t)
        q = (vals - 1.0) / (vals + 1.0)
        assert np.max(np.abs(q)) <= abs(sigma - 1.0) + 1e-9
        assert np.max(np.abs(q)) >= abs(sigma - 1.0) - 1e-4
        inner = p.p(0.3 * ring, t)
        qi = (inner - 1.0) / (inner + 1.0)
        if t > 0.0:  # constant modulus at t = 0, strictly smaller inside later
            assert np.max(np.abs(qi)) < abs(sigma - 1.0)
        else:
            assert np.max(np.abs(qi)) <= abs(sigma - 1.0) + 1e-12


def test_becker_condition_pass_and_fail():
    p = KoebeHerglotz(0.5)
    ok = check_becker_condition(p, 0.5)
    assert ok.satisfied
    assert ok.worst_margin <= 0.0
    bad = check_becker_condition(p, 0.3)
    assert not bad.satisfied
    assert bad.worst_margin > 0.0
    assert bad.worst_sample is not None
    # sigma family: |omega| = |sigma - 1|
    assert check_becker_condition(sigma_herglotz(1.5), 0.5).satisfied
    assert not check_becker_condition(sigma_herglotz(1.5), 0.4).satisfied


def test_weaker_condition_about_center():
    p = KoebeHerglotz(0.5)
    a = CenterTrajectory.constant(1.0)
    assert check_weaker_condition(p, 0.5, a).satisfied
    assert not check_weaker_condition(p, 0.3, a).satisfied


def test_coefficient_table_row_semantics():
    # single row (c2, c3) = (0, -k) encodes phi = -k z^3, the koebe tail
    k = 0.5
    table = CoefficientTableHerglotz([0.0], [[0.0, -k]])
    want = (1.0 - k * ZS) / (1.0 + k * ZS)
    assert np.max(np.abs(table.p(ZS, 0.0) - want)) <= 1e-14
    assert np.max(np.abs(table.p(ZS, 9.0) - want)) <= 1e-14  # held forever
    assert table.tail_sup() == pytest.approx(k, abs=1e-12)
    assert table.time_breakpoints() == ()


def test_coefficient_table_hold_last_and_breakpoints():
    k = 0.4
    table = CoefficientTableHerglotz([0.0, 1.0], [[0.0, -k], [0.0, 0.0]])
    koebe = (1.0 - k * ZS) / (1.0 + k * ZS)
    assert np.max(np.abs(table.p(ZS, 0.5) - koebe)) <= 1e-14
    assert np.max(np.abs(table.p(ZS, 1.0) - 1.0)) == 0.0
    assert np.max(np.abs(table.p(ZS, 50.0) - 1.0)) == 0.0
    assert np.max(np.abs(table.p(ZS, -2.0) - koebe)) <= 1e-14  # held at front
    assert table.time_breakpoints() == (1.0,)


def test_coefficient_table_validation_and_pole():
    with pytest.raises(ValidationError):
        CoefficientTableHerglotz([0.0, 0.0], [[0.1], [0.2]])
    with pytest.raises(ValidationError):
        CoefficientTableHerglotz([0.0], [[0.1], [0.2]])
    table = CoefficientTableHerglotz([0.0], [[1.0]])  # phi / z^2 = 1 at z = 1
    with pytest.raises(SingularValueError):
        table.p(1.0 + 0.0j, 0.0)


def test_rho_catalog_profiles():
    tanh = rho_catalog("tanh-sqrt")
    assert tanh.rho(0.0) == 0.0
    assert tanh.rho(4.0) == pytest.approx(math.tanh(2.0), abs=1e-15)
    sqrt = rho_catalog("sqrt-rational")
    assert sqrt.rho(4.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    with pytest.raises(ValidationError):
        rho_catalog("bogus")
    # cumulative imaginary part: closed form vs independent quadrature
    for spec in (tanh, sqrt):
        got = spec.cumulative_imaginary(2.0)
        want = quad(spec.imaginary_rate, 0.0, 2.0, limit=200)[0]
        assert got == pytest.approx(want, abs=1e-9)


def test_essential_driving_unit_modulus_and_phase():
    p, tau = essential_example_driving("tanh-sqrt", t_max=100.0)
    for t in (0.1, 1.0, 10.0, 100.0):
        assert abs(abs(tau.tau(t)) - 1.0) <= 1e-12
    # p is constant in z with unit real part
    vals = p.p(ZS, 2.0)
    assert np.max(np.abs(vals.real - 1.0)) == 0.0
    assert np.max(np.abs(vals - vals[0])) == 0.0
    # accumulated phase is increasing
    thetas = [tau.theta(t) for t in (0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(thetas, thetas[1:]))
    with pytest.raises(TableRangeError):
        tau.tau(101.0)
    with pytest.raises(DomainError):
        tau.tau(-1.0)


def test_essential_driving_rejects_bad_profiles():
    # tanh profile saturates to 1.0 in floating point at large t
    with pytest.raises(InvalidRhoError):
        essential_example_driving("tanh-sqrt", t_max=400.0)
    with pytest.raises(InvalidRhoError):
        essential_example_driving(
            RhoSpec("shifted", lambda t: 0.5, lambda t: 0.0), t_max=1.0)
    # rho ~ t makes the phase integral diverge at 0
    with pytest.raises(InvalidRhoError):
        essential_example_driving(
            RhoSpec("linear", lambda t: 0.9 * t, lambda t: 0.9), t_max=0.5)


def test_parse_herglotz_spec():
    k = 0.5
    p = parse_herglotz_spec("koebe:k=0.5")
    assert np.max(np.abs(p.p(ZS, 0.0)
                         - (1.0 - k * ZS) / (1.0 + k * ZS))) <= 1e-14
    p2 = parse_herglotz_spec("koebe:k=0.5,n=2")
    assert abs(complex(p2.p(0.5 + 0.0j, 0.0))
               - complex((1 - k * 0.25) / (1 + k * 0.25))) <= 1e-14
    c = parse_herglotz_spec("const:1")
    assert complex(c.p(0.1 + 0.0j, 0.0)) == 1.0
    s = parse_herglotz_spec("sigma:sigma=1.5")
    assert abs(complex(s.p(0.0 + 0.0j, 0.0)) - 1.0 / 3.0) <= 1e-12
    e = parse_herglotz_spec("essential:rho=tanh-sqrt,t_max=50")
    assert complex(e.p(0.0 + 0.0j, 1.0)).real == 1.0
    for bad in ("koebe", "koebe:k=1.2", "sigma:sigma=2.5", "nope:1",
                "essential:rho=bogus"):
        with pytest.raises(ValidationError):
            parse_herglotz_spec(bad)


def test_parse_driving_spec():
    radial = parse_driving_spec("0")
    assert radial.is_radial
    assert radial.tau(3.0) == 0.0
    fixed = parse_driving_spec("const:1")
    assert not fixed.is_radial
    assert fixed.tau(0.5) == 1.0
    lit = parse_driving_spec("0.6+0.8j")
    assert abs(lit.tau(0.0) - (0.6 + 0.8j)) <= 1e-15
    with pytest.raises(ValidationError):
        parse_driving_spec("const:2")
    with pytest.raises(ValidationError):
        parse_driving_spec("what")


def test_validate_herglotz_spec_catches_non_holomorphic():
    good = validate_herglotz_spec(KoebeHerglotz(0.5))
    assert good.satisfied
    # |z|^2 fails the circle-mean probe (harmonic conj(z) would pass)
    bad = UserHerglotz(lambda z, t: 1.0 + np.abs(z) ** 2)
    report = validate_herglotz_spec(bad)
    assert not report.satisfied
    # negative real part is flagged
    neg = UserHerglotz(lambda z, t: np.full_like(np.asarray(z, complex), -1.0))
    assert not validate_herglotz_spec(neg).satisfied


def test_condition_sampling_layout():
    s = ConditionSampling()
    nodes = s.z_nodes()
    assert nodes.shape == (len(s.radii) * s.angular_count,)
    assert np.max(np.abs(nodes)) < 1.0
    custom = default_condition_sampling(t_max=4.0, time_count=8)
    assert len(custom.times) == 8
    assert custom.times[-1] == 4.0


def test_lambda_slice_endpoints():
    p = KoebeHerglotz(0.5)
    k = 0.5
    # lam = k returns the base function
    same = lambda_slice(p, k, 1.0, k)
    assert np.max(np.abs(same.p(ZS, 0.0) - p.p(ZS, 0.0))) <= 1e-12
    # lam = 0 returns the constant center value
    center = lambda_slice(p, k, 1.0, 0.0)
    assert isinstance(center, ConstantHerglotz)
    assert np.all(center.p(ZS, 0.0) == 1.0)
    # intermediate slices stay in the shrunken hyperbolic disk
    mid = lambda_slice(p, k, 1.0, 0.25)
    assert check_becker_condition(mid, 0.25).satisfied
    with pytest.raises(ValidationError):
        lambda_slice(p, k, 1.0, 1.5)
    with pytest.raises(ValidationError):
        lambda_slice(p, 1.0, 1.0, 0.5)
    with pytest.raises(ValidationError):
        lambda_slice(p, 0.3, 1.0, 0.3, validate=True)  # base exceeds k


def test_center_trajectory_validation():
    with pytest.raises(ValidationError):
        CenterTrajectory.constant(-0.5)
    a = CenterTrajectory.constant(1.0, k=0.5)
    assert a(3.0) == 1.0
    assert a.hyperbolic_radius == pytest.approx(math.atanh(0.5), abs=1e-15)
