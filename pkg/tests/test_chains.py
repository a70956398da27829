"""Loewner chains: normalization limits, nesting, compatibility, ranges."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from loewnerqc.analysis import oracle
from loewnerqc.chains import (
    ChainEvaluator,
    ChainSettings,
    chain_convergence_profile,
    chain_eval,
    compatibility_residual,
    nesting_probe,
    radial_derivative_factor,
    range_diagnostic,
)
from loewnerqc.errors import ConvergenceError, DomainError, ValidationError
from loewnerqc.evolution import (
    EvolutionTrajectory,
    VectorField,
    assemble_vector_field,
)
from loewnerqc.herglotz import (
    essential_example_driving,
    parse_herglotz_spec,
    rho_catalog,
)

RNG = np.random.default_rng(20260816)


def _disk_samples(rng, n, radius=0.9):
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


@pytest.fixture(scope="module")
def koebe_eval():
    traj = EvolutionTrajectory(assemble_vector_field("0", "koebe:k=0.5"))
    return ChainEvaluator(traj)


def test_chain_mode_selection_and_validation():
    radial = EvolutionTrajectory(assemble_vector_field("0", "const:1"))
    assert ChainEvaluator(radial).mode == "radial"
    general = EvolutionTrajectory(assemble_vector_field("const:1", "const:1"))
    assert ChainEvaluator(general).mode == "general"
    with pytest.raises(ValidationError):
        ChainEvaluator(general, mode="radial")
    with pytest.raises(ValidationError):
        ChainEvaluator(radial, mode="weird")
    with pytest.raises(ValidationError):
        ChainEvaluator(object())


def test_radial_derivative_factor_is_exponential_integral():
    p = parse_herglotz_spec("koebe:k=0.5")
    # p(0, t) = 1, so the factor is e^{-t}
    assert abs(radial_derivative_factor(p, 2.0) - math.exp(-2.0)) <= 1e-10
    assert abs(radial_derivative_factor(p, 2.0, t_lo=1.5)
               - math.exp(-0.5)) <= 1e-10


def test_koebe_chain_matches_closed_form(koebe_eval):
    k = 0.5
    zs = _disk_samples(np.random.default_rng(1), 64, radius=0.9)
    got = koebe_eval.eval_batch(0.0, zs)
    want = zs / (1.0 - k * zs) ** 2
    assert np.max(np.abs(got - want)) <= 1e-6
    # later chain elements scale by e^s for this time-constant p
    got_s = koebe_eval.eval_batch(0.7, zs[:8])
    want_s = math.exp(0.7) * zs[:8] / (1.0 - k * zs[:8]) ** 2
    assert np.max(np.abs(got_s - want_s)) <= 1e-6


def test_quadratic_koebe_chain(koebe_eval):
    k = 0.5
    traj = EvolutionTrajectory(assemble_vector_field("0", "koebe:k=0.5,n=2"))
    ev = ChainEvaluator(traj)
    zs = _disk_samples(np.random.default_rng(2), 24, radius=0.85)
    got = ev.eval_batch(0.0, zs)
    want = zs / (1.0 - k * zs ** 2)
    assert np.max(np.abs(got - want)) <= 1e-8


def test_sigma_chain_matches_catalog_map():
    f = oracle("fsigma", sigma=1.5)
    traj = EvolutionTrajectory(assemble_vector_field("0", "sigma:sigma=1.5"))
    ev = ChainEvaluator(traj)
    zs = _disk_samples(np.random.default_rng(3), 24, radius=0.8)
    got = ev.eval_batch(0.0, zs)
    want = f.interior(zs)
    assert np.max(np.abs(got - want)) <= 1e-8


def test_general_mode_agrees_with_radial_on_radial_field(koebe_eval):
    # dual route: Moebius renormalization must reproduce the scalar one
    ev_gen = ChainEvaluator(koebe_eval.trajectory, mode="general")
    zs = _disk_samples(np.random.default_rng(4), 8, radius=0.7)
    a = koebe_eval.eval_batch(0.0, zs)
    b = ev_gen.eval_batch(0.0, zs)
    assert np.max(np.abs(a - b)) <= 1e-6


def test_scalar_batch_and_wrapper_consistency(koebe_eval):
    z = 0.4 + 0.3j
    v1 = koebe_eval.eval(0.0, z)
    v2 = koebe_eval.eval_batch(0.0, np.array([z]))[0]
    assert abs(v1 - v2) <= 1e-12
    assert abs(chain_eval(koebe_eval, 0.0, z) - v1) <= 1e-12
    val, dv = koebe_eval.eval_with_derivative(0.0, z)
    assert abs(val - v1) <= 1e-9
    h = 1e-6
    fd = (koebe_eval.eval(0.0, z + h) - koebe_eval.eval(0.0, z - h)) / (2 * h)
    assert abs(dv - fd) <= 1e-5


def test_convergence_profile_monotone_tail(koebe_eval):
    z = 0.5 + 0.2j
    ts = np.array([5.0, 10.0, 20.0, 40.0])
    prof = chain_convergence_profile(koebe_eval, 0.0, z, ts)
    assert prof.shape == (4,)
    errs = np.abs(prof - koebe_eval.eval(0.0, z))
    assert errs[-1] <= 1e-9
    assert errs[-1] <= errs[0] + 1e-12


def test_slow_general_chain_requires_loose_tolerance():
    # tau = 1, p = 1 converges only like 1/horizon
    field = assemble_vector_field("const:1", "const:1")
    strict = ChainEvaluator(EvolutionTrajectory(field))
    with pytest.raises(ConvergenceError) as err:
        strict.eval(0.0, 0.3 + 0.0j)
    assert err.value.last_iterates  # diagnostics carried
    loose = ChainEvaluator(EvolutionTrajectory(field),
                           settings=ChainSettings(tolerance=5e-3))
    zs = _disk_samples(np.random.default_rng(5), 6, radius=0.5)
    got = loose.eval_batch(0.0, zs)
    want = zs / (1.0 - zs)  # chain element (z (1 + s) - s)/(1 - z) at s = 0
    assert np.max(np.abs(got - want)) <= 5e-2


def test_monitor_ladder_needs_room():
    field = assemble_vector_field("0", "koebe:k=0.5")
    ev = ChainEvaluator(EvolutionTrajectory(field),
                        settings=ChainSettings(horizon=40.0, step=1.0))
    with pytest.raises(ValidationError):
        ev.eval(39.5, 0.2 + 0.0j)


def test_chain_settings_validation():
    with pytest.raises(ValidationError):
        ChainSettings(horizon=-1.0)
    with pytest.raises(ValidationError):
        ChainSettings(step=0.0)
    with pytest.raises(ValidationError):
        ChainSettings(tolerance=-1e-9)


def test_nesting_probe(koebe_eval):
    probe = nesting_probe(koebe_eval, 0.3, 1.2, 0.4 + 0.1j)
    assert probe.residual <= 1e-8
    assert abs(probe.w) < 1.0
    assert probe.iterations <= 8
    with pytest.raises(DomainError):
        nesting_probe(koebe_eval, 1.2, 0.3, 0.4)


def test_compatibility_residual(koebe_eval):
    for s, t, z in ((0.0, 1.0, 0.5 + 0.2j), (0.4, 2.0, -0.3 + 0.4j)):
        assert compatibility_residual(koebe_eval, s, t, z) <= 1e-8


def test_range_radial_identity_is_plane():
    field = assemble_vector_field("0", "const:1")
    report = range_diagnostic(field, horizon=15.0)
    assert report.verdict == "plane"
    # a = 0, tau = 0: q = 1 and the decay is exactly e^{-t}
    assert np.max(np.abs(report.q_rate - 1.0)) <= 1e-12
    want = np.exp(-report.times)
    assert np.max(np.abs(report.derivative_decay - want)) <= 1e-10
    assert report.decay_at_horizon == pytest.approx(math.exp(-15.0),
                                                    rel=1e-10)
    assert np.max(np.abs(report.center.values)) <= 1e-12
    assert report.integral_estimate == pytest.approx(15.0, abs=1e-9)


def test_range_sqrt_rational_is_plane():
    p, tau = essential_example_driving("sqrt-rational", t_max=400.0)
    report = range_diagnostic(VectorField(tau, p), horizon=400.0)
    assert report.verdict == "plane"
    spec = rho_catalog("sqrt-rational")
    want = quad(lambda t: 1.0 - spec.rho(t) ** 2, 0.0, 400.0, limit=400)[0]
    assert report.integral_estimate == pytest.approx(want, abs=0.05)
    assert report.decay_at_horizon <= 1e-6
    assert report.nu_observed == 0.0
    # p is unbounded near t = 0, so the hypothesis screen must say so
    assert any("hypothesis" in n for n in report.notes)


def test_range_tanh_is_disk_like():
    p, tau = essential_example_driving("tanh-sqrt", t_max=100.0)
    report = range_diagnostic(VectorField(tau, p), horizon=100.0)
    assert report.verdict == "disk-like"
    # trapezoid sampling at step 0.25 carries a ~5e-3 bias; the exact
    # value of the full integral is 2 log 2
    assert report.integral_estimate == pytest.approx(2.0 * math.log(2.0),
                                                     abs=8e-3)
    assert report.tail_increment <= 1e-6
    assert report.decay_at_horizon == pytest.approx(0.1713, abs=5e-3)
    d = report.to_dict()
    json.dumps(d)
    assert d["verdict"] == "disk-like"


def test_range_validation():
    field = assemble_vector_field("0", "const:1")
    with pytest.raises(ValidationError):
        range_diagnostic(field, horizon=0.0)
    with pytest.raises(ValidationError):
        range_diagnostic(object(), horizon=1.0)
