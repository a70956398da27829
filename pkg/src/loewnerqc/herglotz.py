"""Herglotz-function specs, driving points, and containment diagnostics.

A Herglotz function here is a map p(z, t), holomorphic in z on the unit
disk with Re p >= 0 for a.e. time t and locally integrable in t.  Specs
are immutable evaluators for p and its z-derivative.  The catalog holds
the closed forms used throughout the test oracles: constants, the
Koebe-type family (1 - k z^n)/(1 + k z^n), a rational one-slit family,
and the essential-driving family p = 1 - i c(t) whose evolution family
has an explicitly known center trajectory.

Containment checks probe Becker's condition p(D, t) in U(k) and the
weaker condition that p(D, t) stays in a moving closed hyperbolic disk
of radius artanh(k) about a center trajectory a(t) in the right
half-plane.  lambda_slice hyperbolically rescales p toward the centers,
producing the holomorphic-in-lambda interpolation between the constant
family (lambda = 0) and p itself (lambda = k).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad, solve_ivp

from . import _fd
from .core import GEOMETRIC_TOL, HalfPlaneChart
from .errors import (
    DomainError,
    IntegrationFailureError,
    InvalidRhoError,
    NotHerglotzError,
    SingularValueError,
    TableRangeError,
    ValidationError,
)

# Denominators below this magnitude count as exact poles of a formula.
_POLE_GUARD = 1e-280

DEFAULT_CONDITION_TIMES = tuple(float(t) for t in np.linspace(0.0, 8.0, 32))


def _like(value: complex, z):
    """Broadcast a z-independent value to the shape of z."""
    if isinstance(z, np.ndarray):
        return np.full(z.shape, complex(value), dtype=complex)
    return complex(value)


def _scalarize(z, values):
    return values if isinstance(z, np.ndarray) else complex(values)


def _format_float(x: float) -> str:
    return repr(float(x))


def _format_complex(v: complex) -> str:
    v = complex(v)
    if v.imag == 0.0:
        return repr(v.real)
    return repr(v)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"cannot parse complex value {text!r}") from exc


def _parse_params(body: str) -> dict:
    params = {}
    body = body.strip()
    if not body:
        return params
    for item in body.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"expected key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return params


class HerglotzSpec:
    """Immutable evaluator for p(z, t); subclasses fill in the formulas.

    p accepts a complex scalar or ndarray z and a scalar time; p_dz
    falls back to high-order finite differences when no closed form is
    available.
    """

    kind = "abstract"
    spec_string: str | None = None

    def p(self, z, t: float):
        raise NotImplementedError

    def p_dz(self, z, t: float):
        return _fd.holomorphic_derivative(lambda w: self.p(w, t), z, h=1e-3)

    def p_center(self, t: float) -> complex:
        return complex(self.p(0.0 + 0.0j, t))

    def time_breakpoints(self) -> tuple:
        """Times where t -> p(z, t) may jump; integrators stop at these."""
        return ()

    def check_time(self, t: float) -> None:
        if t < 0.0:
            raise DomainError(f"time must be nonnegative, got {t}")

    def __call__(self, z, t: float):
        return self.p(z, t)


@dataclass(frozen=True)
class ConstantHerglotz(HerglotzSpec):
    """p identically equal to one complex value with Re >= 0."""

    value: complex = 1.0 + 0.0j

    kind = "constant"

    def __post_init__(self):
        v = complex(self.value)
        object.__setattr__(self, "value", v)
        if v.real < 0.0:
            raise NotHerglotzError(f"constant value must have Re >= 0, got {v}")

    @property
    def spec_string(self) -> str:
        return "const:" + _format_complex(self.value)

    def p(self, z, t: float):
        return _like(self.value, z)

    def p_dz(self, z, t: float):
        return _like(0.0, z)


@dataclass(frozen=True)
class KoebeHerglotz(HerglotzSpec):
    """p(z, t) = (1 - k z^n)/(1 + k z^n); generates the chain
    e^t z/(1 - k z^n)^(2/n) in the radial equation."""

    k: float
    n: int = 1

    kind = "koebe"

    def __post_init__(self):
        if not (0.0 <= self.k < 1.0):
            raise ValidationError(f"koebe parameter k must be in [0, 1), got {self.k}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"koebe power n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spec_string(self) -> str:
        return f"koebe:k={_format_float(self.k)},n={self.n}"

    def p(self, z, t: float):
        zn = np.asarray(z, dtype=complex) ** self.n
        return _scalarize(z, (1.0 - self.k * zn) / (1.0 + self.k * zn))

    def p_dz(self, z, t: float):
        zz = np.asarray(z, dtype=complex)
        zn = zz ** (self.n - 1)
        return _scalarize(
            z, -2.0 * self.k * self.n * zn / (1.0 + self.k * zn * zz) ** 2)


class RationalHerglotz(HerglotzSpec):
    """p(z, t) = N(z, t)/D(z, t) with polynomial N, D in z whose
    coefficients are functions of t (low order first)."""

    kind = "rational"

    def __init__(self, num_coeffs, den_coeffs, spec_string=None, name="rational"):
        self._num = num_coeffs
        self._den = den_coeffs
        self.spec_string = spec_string
        self.name = name

    def _coeffs(self, t: float):
        return (np.asarray(self._num(t), dtype=complex),
                np.asarray(self._den(t), dtype=complex))

    def p(self, z, t: float):
        num, den = self._coeffs(t)
        zz = np.asarray(z, dtype=complex)
        d = npoly.polyval(zz, den)
        if np.any(np.abs(d) < _POLE_GUARD):
            raise SingularValueError(f"rational spec hit a pole at t = {t}")
        return _scalarize(z, npoly.polyval(zz, num) / d)

    def p_dz(self, z, t: float):
        num, den = self._coeffs(t)
        zz = np.asarray(z, dtype=complex)
        n = npoly.polyval(zz, num)
        d = npoly.polyval(zz, den)
        nd = npoly.polyval(zz, npoly.polyder(num))
        dd = npoly.polyval(zz, npoly.polyder(den))
        if np.any(np.abs(d) < _POLE_GUARD):
            raise SingularValueError(f"rational spec hit a pole at t = {t}")
        return _scalarize(z, (nd * d - n * dd) / (d * d))


def sigma_herglotz(sigma: float) -> RationalHerglotz:
    """Rational family driving the one-slit chain: the Becker quotient
    (p - 1)/(p + 1) equals (sigma - 1)(e^{2t} z^2 - 1)/(e^{2t} - z^2),
    so sup |quotient| = |sigma - 1| for every t."""
    sigma = float(sigma)
    if not (0.0 < sigma < 2.0):
        raise ValidationError(f"sigma must lie in (0, 2), got {sigma}")
    s1 = sigma - 1.0

    def num(t: float):
        e = math.exp(2.0 * t)
        return (e - s1, 0.0, s1 * e - 1.0)

    def den(t: float):
        e = math.exp(2.0 * t)
        return (e + s1, 0.0, -s1 * e - 1.0)

    return RationalHerglotz(
        num, den, spec_string=f"sigma:sigma={_format_float(sigma)}", name="sigma")


# -- essential-driving family -------------------------------------------------

@dataclass(frozen=True, eq=False)
class RhoSpec:
    """Radius profile t -> rho(t) with rho(0) = 0, 0 <= rho < 1, and a
    closed-form derivative; both callables take scalar t."""

    name: str
    rho: object
    drho: object

    def imaginary_rate(self, t: float) -> float:
        """c(t) = rho'(t)(1 + rho^2)/(1 - rho^2)^2, the imaginary part
        carried by p = 1 - i c(t)."""
        r = float(self.rho(t))
        dr = float(self.drho(t))
        one = (1.0 - r * r)
        return dr * (1.0 + r * r) / (one * one)

    def cumulative_imaginary(self, t: float) -> float:
        """Integral of c over [0, t]; closed form rho/(1 - rho^2)."""
        r = float(self.rho(t))
        return r / (1.0 - r * r)


def _sqrt_rational_rho() -> RhoSpec:
    def rho(t: float) -> float:
        u = math.sqrt(t)
        return u / (1.0 + u)

    def drho(t: float) -> float:
        if t <= 0.0:
            return math.inf
        u = math.sqrt(t)
        return 1.0 / (2.0 * u * (1.0 + u) ** 2)

    return RhoSpec("sqrt-rational", rho, drho)


def _tanh_sqrt_rho() -> RhoSpec:
    def rho(t: float) -> float:
        return math.tanh(math.sqrt(t))

    def drho(t: float) -> float:
        if t <= 0.0:
            return math.inf
        u = math.sqrt(t)
        sech2 = 1.0 / math.cosh(u) ** 2
        return sech2 / (2.0 * u)

    return RhoSpec("tanh-sqrt", rho, drho)


RHO_CATALOG = {
    "sqrt-rational": _sqrt_rational_rho,
    "tanh-sqrt": _tanh_sqrt_rho,
}


def rho_catalog(name: str) -> RhoSpec:
    try:
        return RHO_CATALOG[name]()
    except KeyError:
        raise ValidationError(
            f"unknown rho profile {name!r}; have {sorted(RHO_CATALOG)}") from None


class EssentialHerglotz(HerglotzSpec):
    """p(z, t) = 1 - i c(t), constant in z with unit real part.

    c(t) = rho'(1 + rho^2)/(1 - rho^2)^2 blows up integrably at t = 0,
    so evaluation exactly at t = 0 yields an infinite imaginary part;
    integrators must start at a small positive floor.
    """

    kind = "essential"

    def __init__(self, rho_spec: RhoSpec):
        self.rho_spec = rho_spec
        self.spec_string = (f"essential:rho={rho_spec.name}"
                            if rho_spec.name in RHO_CATALOG else None)

    def p(self, z, t: float):
        return _like(1.0 - 1j * self.rho_spec.imaginary_rate(t), z)

    def p_dz(self, z, t: float):
        return _like(0.0, z)


class PiecewiseHerglotz(HerglotzSpec):
    """Piecewise-in-t table of sub-specs: row (start, spec) is active on
    [start, next start); intended for t-constant segments."""

    kind = "piecewise"

    def __init__(self, segments):
        segments = tuple((float(s), spec) for s, spec in segments)
        if not segments:
            raise ValidationError("piecewise spec needs at least one segment")
        starts = [s for s, _ in segments]
        if starts != sorted(starts) or len(set(starts)) != len(starts):
            raise ValidationError("piecewise segment starts must strictly increase")
        if starts[0] != 0.0:
            raise ValidationError("first piecewise segment must start at t = 0")
        self.segments = segments
        self._starts = starts

    def _active(self, t: float) -> HerglotzSpec:
        if t < 0.0:
            raise TableRangeError(f"piecewise spec undefined for t = {t}")
        return self.segments[bisect_right(self._starts, t) - 1][1]

    def p(self, z, t: float):
        return self._active(t).p(z, t)

    def p_dz(self, z, t: float):
        return self._active(t).p_dz(z, t)

    def time_breakpoints(self) -> tuple:
        return tuple(self._starts[1:])


class CoefficientTableHerglotz(HerglotzSpec):
    """p rebuilt from per-time power-series tails.

    Row m holds coefficients (c_2, ..., c_{L+1}) of a bounded
    holomorphic phi_m(zeta) = sum_{n>=2} c_n zeta^n; at time t the
    active row is the last with row-time <= t (held at both ends), and
    p = (1 + phi(z)/z^2)/(1 - phi(z)/z^2).
    """

    kind = "coefficient-table"

    def __init__(self, times, rows, note: str = ""):
        times = np.asarray(times, dtype=float)
        rows = np.atleast_2d(np.asarray(rows, dtype=complex))
        if times.ndim != 1 or len(times) != rows.shape[0]:
            raise ValidationError("need one coefficient row per time")
        if np.any(np.diff(times) <= 0.0):
            raise ValidationError("table times must strictly increase")
        self.times = times
        self.rows = rows
        self.note = note

    def _row(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.rows[min(max(i, 0), len(self.times) - 1)]

    def tail_ratio(self, z, t: float):
        """phi(z)/z^2 = sum_j c_{j+2} z^j for the row active at t."""
        return npoly.polyval(np.asarray(z, dtype=complex), self._row(t))

    def p(self, z, t: float):
        q = self.tail_ratio(z, t)
        den = 1.0 - q
        if np.any(np.abs(den) < _POLE_GUARD):
            raise SingularValueError(f"reconstructed tail reaches 1 at t = {t}")
        return _scalarize(z, (1.0 + q) / den)

    def p_dz(self, z, t: float):
        zz = np.asarray(z, dtype=complex)
        row = self._row(t)
        q = npoly.polyval(zz, row)
        dq = npoly.polyval(zz, npoly.polyder(row))
        return _scalarize(z, 2.0 * dq / (1.0 - q) ** 2)

    def tail_sup(self, n_angles: int = 256) -> float:
        """Max over rows of sup |phi| on the unit circle (equals sup of
        |phi(z)/z^2| there); used as the observed Becker bound k."""
        ring = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
        return float(max(np.max(np.abs(npoly.polyval(ring, row)))
                         for row in self.rows))

    def time_breakpoints(self) -> tuple:
        return tuple(float(t) for t in self.times[1:])


class UserHerglotz(HerglotzSpec):
    """Escape hatch wrapping arbitrary callables func(z, t) and optional
    dfunc(z, t); nothing is validated beyond what
    validate_herglotz_spec is explicitly asked to probe."""

    kind = "user"

    def __init__(self, func, dfunc=None, note: str = ""):
        self._func = func
        self._dfunc = dfunc
        self.note = note

    def p(self, z, t: float):
        return self._func(z, t)

    def p_dz(self, z, t: float):
        if self._dfunc is not None:
            return self._dfunc(z, t)
        return super().p_dz(z, t)


# -- driving specs -------------------------------------------------------------

class DrivingSpec:
    """Attracting point t -> tau(t) in the closed unit disk."""

    kind = "abstract"
    spec_string: str | None = None

    def tau(self, t: float) -> complex:
        raise NotImplementedError

    @property
    def is_radial(self) -> bool:
        return False

    def time_breakpoints(self) -> tuple:
        return ()

    def check_time(self, t: float) -> None:
        if t < 0.0:
            raise DomainError(f"time must be nonnegative, got {t}")

    def __call__(self, t: float) -> complex:
        return self.tau(t)


@dataclass(frozen=True)
class ConstantDriving(DrivingSpec):
    value: complex = 0.0 + 0.0j

    kind = "constant"

    def __post_init__(self):
        v = complex(self.value)
        object.__setattr__(self, "value", v)
        if abs(v) > 1.0 + 1e-12:
            raise ValidationError(f"driving point must satisfy |tau| <= 1, got {v}")

    @property
    def spec_string(self) -> str:
        return "const:" + _format_complex(self.value)

    @property
    def is_radial(self) -> bool:
        return self.value == 0.0

    def tau(self, t: float) -> complex:
        return self.value


class PiecewiseDriving(DrivingSpec):
    """Piecewise-constant driving: rows (start, value)."""

    kind = "piecewise"

    def __init__(self, segments):
        segments = tuple((float(s), complex(v)) for s, v in segments)
        if not segments:
            raise ValidationError("piecewise driving needs at least one segment")
        starts = [s for s, _ in segments]
        if starts != sorted(starts) or len(set(starts)) != len(starts):
            raise ValidationError("piecewise segment starts must strictly increase")
        if starts[0] != 0.0:
            raise ValidationError("first piecewise segment must start at t = 0")
        if any(abs(v) > 1.0 + 1e-12 for _, v in segments):
            raise ValidationError("driving values must satisfy |tau| <= 1")
        self.segments = segments
        self._starts = starts

    def tau(self, t: float) -> complex:
        if t < 0.0:
            raise TableRangeError(f"piecewise driving undefined for t = {t}")
        return self.segments[bisect_right(self._starts, t) - 1][1]

    def time_breakpoints(self) -> tuple:
        return tuple(self._starts[1:])


class EssentialDriving(DrivingSpec):
    """tau(t) = i e^{i theta(t)} (1 - i rho(t))^2 / (1 + rho(t)^2).

    |tau(t)| = 1 identically since |(1 - i rho)^2| = 1 + rho^2; theta is
    the accumulated phase with theta' = (1 - rho^2)^2 / ((1 + rho^2) rho).
    """

    kind = "essential"

    def __init__(self, rho_spec: RhoSpec, theta_fn, t_max: float):
        self.rho_spec = rho_spec
        self._theta = theta_fn
        self.t_max = float(t_max)
        self.spec_string = (f"essential:rho={rho_spec.name}"
                            if rho_spec.name in RHO_CATALOG else None)

    def check_time(self, t: float) -> None:
        super().check_time(t)
        if t > self.t_max * (1.0 + 1e-12):
            raise TableRangeError(
                f"driving phase built up to t = {self.t_max}, asked for {t}")

    def theta(self, t: float) -> float:
        self.check_time(t)
        return float(self._theta(t))

    def tau(self, t: float) -> complex:
        self.check_time(t)
        r = float(self.rho_spec.rho(t))
        w = 1.0 - 1j * r
        return 1j * np.exp(1j * self.theta(t)) * w * w / (1.0 + r * r)


def _validate_rho(spec: RhoSpec, t_max: float) -> None:
    if abs(float(spec.rho(0.0))) > 1e-12:
        raise InvalidRhoError(f"rho(0) must vanish, got {spec.rho(0.0)}")
    ladder = [t for t in (0.25, 1.0, 4.0, 25.0, 100.0, 400.0) if t < t_max]
    for t in ladder + [t_max]:
        r = float(spec.rho(t))
        if not (0.0 <= r < 1.0):
            hint = (" (floating-point saturation; restrict t_max)"
                    if r == 1.0 and t > 1.0 else "")
            raise InvalidRhoError(f"rho({t}) = {r} outside [0, 1){hint}")
    # Reciprocal integrability near 0 (substitute t = u^2): truncations of
    # the integral of dt/rho must have settled, else the phase diverges.
    def g(u: float) -> float:
        return 2.0 * u / float(spec.rho(u * u))

    head = quad(g, 1e-4, 1.0, limit=200)[0]
    refined = quad(g, 1e-8, 1.0, limit=200)[0]
    if not math.isfinite(refined) or refined - head > 0.05 * max(1.0, abs(head)):
        raise InvalidRhoError(
            "integral of dt/rho diverges at 0 "
            f"(truncations {head:.6g} -> {refined:.6g})")


def _build_theta(spec: RhoSpec, t_max: float):
    # theta(t) = integral of (1-rho^2)^2/((1+rho^2) rho); substituting
    # t = u^2 removes the endpoint singularity because rho(u^2) ~ u.
    def rhs(u, y):
        uu = max(float(u), 1e-12)
        r = float(spec.rho(uu * uu))
        return [2.0 * uu * (1.0 - r * r) ** 2 / ((1.0 + r * r) * r)]

    u_max = math.sqrt(t_max)
    sol = solve_ivp(rhs, (0.0, u_max), [0.0], method="RK45",
                    rtol=1e-12, atol=1e-14, dense_output=True)
    if not sol.success:
        raise IntegrationFailureError(
            f"phase integral failed: {sol.message}", last_time=float(sol.t[-1]) ** 2)
    dense = sol.sol

    def theta(t: float) -> float:
        return float(dense(math.sqrt(max(float(t), 0.0)))[0])

    return theta


def essential_example_driving(rho, t_max: float = 500.0, validate: bool = True):
    """(HerglotzSpec, DrivingSpec) pair whose evolution family has the
    explicit center trajectory a(t) = rho(t) e^{i theta(t)}.

    rho may be an RhoSpec or a catalog name.  The phase theta is built
    once on [0, t_max] by adaptive integration and is exact to ~1e-12.
    """
    spec = rho if isinstance(rho, RhoSpec) else rho_catalog(str(rho))
    if validate:
        _validate_rho(spec, float(t_max))
    theta = _build_theta(spec, t_max)
    return EssentialHerglotz(spec), EssentialDriving(spec, theta, t_max)


# -- center trajectories and condition checks ----------------------------------

@dataclass(frozen=True, eq=False)
class CenterTrajectory:
    """Hyperbolic-disk centers t -> a(t) with Re a >= 0.

    Re a(t) > 0 selects the closed hyperbolic disk of radius artanh(k)
    about a(t) in the right half-plane; Re a(t) = 0 degenerates the disk
    to the single point a(t).
    """

    func: object
    k: float | None = None
    is_constant: bool = False

    @classmethod
    def constant(cls, value, k: float | None = None) -> "CenterTrajectory":
        v = complex(value)
        if v.real < 0.0:
            raise ValidationError(f"center must have Re >= 0, got {v}")
        return cls(func=lambda t: v, k=k, is_constant=True)

    @property
    def hyperbolic_radius(self) -> float | None:
        return math.atanh(self.k) if self.k is not None else None

    def __call__(self, t: float) -> complex:
        return complex(self.func(t))


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a sampled containment check.

    worst_margin is the largest violated quantity minus its bound;
    satisfied if and only if worst_margin <= tolerance.
    """

    satisfied: bool
    worst_margin: float
    worst_sample: tuple | None
    tolerance: float
    label: str = ""
    notes: tuple = ()

    def to_dict(self) -> dict:
        sample = None
        if self.worst_sample is not None:
            z, t = self.worst_sample
            sample = {"z": [complex(z).real, complex(z).imag], "t": float(t)}
        return {
            "label": self.label,
            "satisfied": bool(self.satisfied),
            "worst_margin": float(self.worst_margin),
            "worst_sample": sample,
            "tolerance": float(self.tolerance),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class ConditionSampling:
    """Sample layout for containment checks: polar z-nodes x times.

    Near-boundary radii matter: the catalog sups are attained as
    |z| -> 1.
    """

    radii: tuple = (0.5, 0.9, 0.99, 0.999)
    angular_count: int = 64
    times: tuple = DEFAULT_CONDITION_TIMES

    def z_nodes(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count
        nodes = np.asarray(self.radii)[:, None] * np.exp(1j * angles)[None, :]
        return nodes.ravel()


def default_condition_sampling(t_max: float = 8.0, time_count: int = 32,
                               t_min: float = 0.0,
                               radii: tuple = (0.5, 0.9, 0.99, 0.999),
                               angular_count: int = 64) -> ConditionSampling:
    times = tuple(float(t) for t in np.linspace(t_min, t_max, time_count))
    return ConditionSampling(radii=radii, angular_count=angular_count, times=times)


def check_becker_condition(p: HerglotzSpec, k: float,
                           sampling: ConditionSampling | None = None,
                           tolerance: float = GEOMETRIC_TOL) -> ConditionReport:
    """Probe p(D, t) in U(k): worst_margin = max |(p-1)/(p+1)| - k."""
    if not (0.0 <= k < 1.0):
        raise ValidationError(f"k must lie in [0, 1), got {k}")
    sampling = sampling or ConditionSampling()
    z = sampling.z_nodes()
    worst = -math.inf
    worst_sample = None
    for t in sampling.times:
        vals = np.asarray(p.p(z, float(t)), dtype=complex)
        den = vals + 1.0
        if np.any(np.abs(den) < _POLE_GUARD):
            raise SingularValueError(
                f"p = -1 encountered at t = {t}; Becker quotient undefined")
        quot = np.abs((vals - 1.0) / den)
        quot = np.where(np.isnan(quot), np.inf, quot)
        i = int(np.argmax(quot))
        margin = float(quot[i]) - k
        if margin > worst:
            worst = margin
            worst_sample = (complex(z[i]), float(t))
    return ConditionReport(worst <= tolerance, worst, worst_sample,
                           tolerance, label="becker-condition")


def check_weaker_condition(p: HerglotzSpec, k: float, a: CenterTrajectory,
                           sampling: ConditionSampling | None = None,
                           tolerance: float = GEOMETRIC_TOL) -> ConditionReport:
    """Probe containment of p(D, t) in the moving hyperbolic disk of
    radius artanh(k) about a(t).

    For Re a(t) > 0 the margin is hyperbolic distance minus artanh(k);
    for Re a(t) = 0 the disk degenerates and the margin is the absolute
    deviation max |p - a(t)|, which must itself be <= tolerance.
    """
    if not (0.0 <= k < 1.0):
        raise ValidationError(f"k must lie in [0, 1), got {k}")
    sampling = sampling or ConditionSampling()
    z = sampling.z_nodes()
    r_k = math.atanh(k)
    worst = -math.inf
    worst_sample = None
    degenerate_seen = False
    for t in sampling.times:
        av = complex(a(float(t)))
        if av.real < 0.0:
            raise ValidationError(
                f"center trajectory left the closed right half-plane at t = {t}")
        vals = np.asarray(p.p(z, float(t)), dtype=complex)
        bad = vals.real < -1e-14
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NotHerglotzError(
                f"Re p < 0 at z = {complex(z[i])}, t = {t}: {complex(vals[i])}")
        if av.real > 0.0:
            ratio = np.abs((vals - av) / (vals + np.conj(av)))
            dist = np.where(ratio < 1.0,
                            np.arctanh(np.minimum(ratio, 1.0 - 1e-17)),
                            np.inf)
            i = int(np.argmax(dist))
            margin = float(dist[i]) - r_k
        else:
            degenerate_seen = True
            dev = np.abs(vals - av)
            i = int(np.argmax(dev))
            margin = float(dev[i])
        if margin > worst:
            worst = margin
            worst_sample = (complex(z[i]), float(t))
    notes = ("degenerate point-disk times use absolute deviation",) if degenerate_seen else ()
    return ConditionReport(worst <= tolerance, worst, worst_sample,
                           tolerance, label="weaker-condition", notes=notes)


class CenterValueHerglotz(HerglotzSpec):
    """p(z, t) = a(t): the lambda = 0 end of the interpolation."""

    kind = "center"

    def __init__(self, center: CenterTrajectory):
        self.center = center

    def p(self, z, t: float):
        return _like(self.center(t), z)

    def p_dz(self, z, t: float):
        return _like(0.0, z)


class LambdaSliceHerglotz(HerglotzSpec):
    """Hyperbolic rescaling of p toward the center trajectory.

    With H_t the half-plane chart at a(t),
    p_lambda = H_t((lam/k) H_t^{-1}(p)); lam = k reproduces p, and
    |lam| <= k keeps values inside the radius-artanh(|lam|) hyperbolic
    disk about a(t).  Times with Re a(t) = 0 pass p through unchanged.
    """

    kind = "lambda-slice"

    def __init__(self, base: HerglotzSpec, k: float, center: CenterTrajectory,
                 lam: complex):
        self.base = base
        self.k = float(k)
        self.center = center
        self.lam = complex(lam)
        self.containment_guaranteed = abs(self.lam) <= self.k + 1e-12

    def p(self, z, t: float):
        av = complex(self.center(t))
        vals = self.base.p(z, t)
        if av.real <= 0.0:
            return vals
        chart = HalfPlaneChart(av)
        return chart.forward((self.lam / self.k) * chart.inverse(vals))

    def p_dz(self, z, t: float):
        av = complex(self.center(t))
        if av.real <= 0.0:
            return self.base.p_dz(z, t)
        w = np.asarray(self.base.p(z, t), dtype=complex)
        dw = np.asarray(self.base.p_dz(z, t), dtype=complex)
        v = (w - 1j * av.imag) / av.real
        phi = (self.lam / self.k) * (v - 1.0) / (v + 1.0)
        # chain rule through H_t and H_t^{-1}; the Re a factors cancel
        out = 4.0 * (self.lam / self.k) * dw / ((1.0 - phi) * (v + 1.0)) ** 2
        return _scalarize(z, out)

    def time_breakpoints(self) -> tuple:
        return self.base.time_breakpoints()


def lambda_slice(p: HerglotzSpec, k: float, a, lam: complex,
                 validate: bool = False) -> HerglotzSpec:
    """Member p_lambda of the holomorphic interpolation family.

    lam = k gives back p; lam = 0 gives the center-value function (a
    constant spec when the trajectory is constant, so the koebe-free
    endpoints stay exact); |lam| <= k guarantees containment in the
    shrunken disk, larger |lam| up to 1 is permitted but flagged on the
    returned spec.
    """
    if not isinstance(a, CenterTrajectory):
        a = CenterTrajectory.constant(a)
    if not (0.0 <= k < 1.0):
        raise ValidationError(f"k must lie in [0, 1), got {k}")
    lam = complex(lam)
    if abs(lam) > 1.0 + 1e-12:
        raise ValidationError(f"|lambda| must be <= 1, got {abs(lam)}")
    if validate and k > 0.0:
        report = check_weaker_condition(p, k, a)
        if not report.satisfied:
            raise ValidationError(
                "base function violates the weaker condition "
                f"(margin {report.worst_margin:.3e})")
    if k == 0.0 or lam == 0.0:
        if a.is_constant:
            return ConstantHerglotz(a(0.0))
        return CenterValueHerglotz(a)
    return LambdaSliceHerglotz(p, k, a, lam)


# -- analytic probes -----------------------------------------------------------

def circle_mean_residual(func, centers, radius: float = 0.01,
                         n_points: int = 16) -> float:
    """Max |mean of func over a small circle - func(center)|; vanishes
    for holomorphic func (mean-value property)."""
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    ring = radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = func(centers[:, None] + ring[None, :])
    means = np.mean(np.asarray(vals, dtype=complex), axis=1)
    cvals = np.asarray(func(centers), dtype=complex)
    return float(np.max(np.abs(means - cvals)))


def schwarz_pick_residual(p: HerglotzSpec, z_samples=None,
                          times=(0.0, 0.5, 1.0, 2.0, 4.0)) -> float:
    """Max over samples of (1 - |z|^2)|p'(z)| - 2 Re p(z).

    Nonpositive (up to derivative noise) for every genuine Herglotz
    function; zero exactly for conformal maps onto the half-plane.
    """
    if z_samples is None:
        radii = np.linspace(0.05, 0.95, 19)
        angles = np.exp(2j * np.pi * np.arange(64) / 64)
        z_samples = (radii[:, None] * angles[None, :]).ravel()
    z = np.asarray(z_samples, dtype=complex)
    worst = -math.inf
    for t in times:
        vals = np.asarray(p.p(z, float(t)), dtype=complex)
        deriv = np.asarray(p.p_dz(z, float(t)), dtype=complex)
        res = (1.0 - np.abs(z) ** 2) * np.abs(deriv) - 2.0 * vals.real
        worst = max(worst, float(np.max(res)))
    return worst


def validate_herglotz_spec(p: HerglotzSpec,
                           sampling: ConditionSampling | None = None,
                           eps_val: float = 1e-10, eps_holo: float = 1e-8,
                           exception_times: tuple = ()) -> ConditionReport:
    """Probe the defining properties on samples: Re p >= -eps_val,
    finite values, and the circle-mean holomorphy probe <= eps_holo.

    Times within 1e-12 of an entry of exception_times are skipped (the
    conditions only need to hold off a declared exceptional set).
    """
    sampling = sampling or ConditionSampling()
    z = sampling.z_nodes()
    probe_centers = z[np.abs(z) <= 0.98]
    worst = -math.inf
    worst_sample = None
    notes = []
    for t in sampling.times:
        if any(abs(t - ex) <= 1e-12 for ex in exception_times):
            continue
        vals = np.asarray(p.p(z, float(t)), dtype=complex)
        if not np.all(np.isfinite(vals)):
            i = int(np.argmin(np.isfinite(vals)))
            notes.append(f"non-finite value at t = {t}")
            worst = math.inf
            worst_sample = (complex(z[i]), float(t))
            break
        i = int(np.argmax(-vals.real))
        margin = float(-vals.real[i]) - eps_val
        if margin > worst:
            worst = margin
            worst_sample = (complex(z[i]), float(t))
        holo = circle_mean_residual(lambda w: p.p(w, float(t)), probe_centers)
        if holo - eps_holo > worst:
            worst = holo - eps_holo
            worst_sample = (None, float(t))
            notes.append(f"holomorphy probe residual {holo:.3e} at t = {t}")
    return ConditionReport(worst <= 0.0, worst, worst_sample, 0.0,
                           label="herglotz-validity", notes=tuple(notes))


def eval_herglotz(p: HerglotzSpec, z, t: float):
    """Value p(z, t) for z in the open unit disk and admissible t."""
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz) >= 1.0):
        raise DomainError("z must lie in the open unit disk")
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t}")
    p.check_time(float(t))
    return p.p(z, float(t))


# -- catalog parsing -----------------------------------------------------------

def catalog_herglotz(name: str, **params) -> HerglotzSpec:
    name = name.lower()
    if name == "const":
        return ConstantHerglotz(params.pop("value", 1.0))
    if name == "koebe":
        return KoebeHerglotz(k=float(params.pop("k")), n=int(params.pop("n", 1)))
    if name == "sigma":
        return sigma_herglotz(float(params.pop("sigma")))
    if name == "essential":
        spec, _ = essential_example_driving(
            params.pop("rho"), t_max=float(params.pop("t_max", 500.0)))
        return spec
    raise ValidationError(f"unknown Herglotz catalog entry {name!r}")


def parse_herglotz_spec(text: str) -> HerglotzSpec:
    """Parse 'const:VALUE' | 'koebe:k=K[,n=N]' | 'sigma:sigma=S' |
    'essential:rho=NAME[,t_max=T]'; VALUE is a complex literal."""
    head, _, body = str(text).partition(":")
    head = head.strip().lower()
    if head == "const":
        return ConstantHerglotz(_parse_complex(body or "1"))
    params = _parse_params(body)
    try:
        spec = catalog_herglotz(head, **params)
    except KeyError as exc:
        raise ValidationError(f"spec {text!r} is missing parameter {exc}") from None
    return spec


def parse_driving_spec(text: str) -> DrivingSpec:
    """Parse a driving spec: a bare complex literal or 'const:VALUE'
    means a constant point; 'essential:rho=NAME[,t_max=T]' builds the
    rotating boundary point of the essential-driving pair."""
    text = str(text).strip()
    try:
        return ConstantDriving(complex(text.replace(" ", "")))
    except ValueError:
        pass
    head, _, body = text.partition(":")
    head = head.strip().lower()
    if head == "const":
        return ConstantDriving(_parse_complex(body))
    if head == "essential":
        params = _parse_params(body)
        try:
            _, driving = essential_example_driving(
                params.pop("rho"), t_max=float(params.pop("t_max", 500.0)))
        except KeyError as exc:
            raise ValidationError(f"spec {text!r} is missing parameter {exc}") from None
        return driving
    raise ValidationError(f"unknown driving spec {text!r}")


__all__ = [
    "HerglotzSpec", "ConstantHerglotz", "KoebeHerglotz", "RationalHerglotz",
    "sigma_herglotz", "RhoSpec", "RHO_CATALOG", "rho_catalog",
    "EssentialHerglotz", "PiecewiseHerglotz", "CoefficientTableHerglotz",
    "UserHerglotz", "DrivingSpec", "ConstantDriving", "PiecewiseDriving",
    "EssentialDriving", "essential_example_driving", "CenterTrajectory",
    "ConditionReport", "ConditionSampling", "default_condition_sampling",
    "check_becker_condition", "check_weaker_condition", "CenterValueHerglotz",
    "LambdaSliceHerglotz", "lambda_slice", "circle_mean_residual",
    "schwarz_pick_residual", "validate_herglotz_spec", "eval_herglotz",
    "catalog_herglotz", "parse_herglotz_spec", "parse_driving_spec",
]
