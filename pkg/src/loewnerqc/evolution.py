"""Herglotz vector fields and the unit-disk evolution ODE.

The two-parameter flow phi_{s,t}(z) solves

    d phi / dt = G(phi, t),   phi_{s,s}(z) = z,

with G(z, t) = (tau(t) - z)(1 - conj(tau(t)) z) p(z, t).  Re p >= 0
makes the disk forward-invariant, so every computed trajectory must
stay inside the unit circle; reaching it signals a solver
misconfiguration, never a model event.

Numerics: adaptive embedded Runge-Kutta 5(4) on the complex system,
with jump times of piecewise specs as mandatory step boundaries.  The
absolute tolerance is kept near zero on purpose: chain reconstruction
multiplies trajectories by factors growing like e^t, which would
amplify any absolute noise floor, so relative error alone governs
accuracy.  Fields with the essential driving's 1/sqrt(t) head are
integrated in u = sqrt(t), which removes the singularity entirely.

The variational companion d(dz)/dt = G'(phi, t) dz produces
d phi_{s,t} / dz alongside the flow, and the lambda machinery evolves
the hyperbolically rescaled fields G_lambda, whose lambda = 0 member is
a Moebius flow and whose normalized family is a holomorphic motion.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import MobiusTransform, cross_ratio
from .errors import (
    BarrierViolationError,
    CannotInvertError,
    DomainError,
    IntegrationFailureError,
    ValidationError,
)
from .herglotz import (
    CenterTrajectory,
    ConditionReport,
    DrivingSpec,
    EssentialDriving,
    EssentialHerglotz,
    HerglotzSpec,
    circle_mean_residual,
    lambda_slice,
    parse_driving_spec,
    parse_herglotz_spec,
)

# Below this sqrt-time coordinate the substituted right-hand side is
# frozen; the induced head error is O(U_FLOOR).
_U_FLOOR = 1e-8


@dataclass(frozen=True)
class SolverSettings:
    """Evolution-solver tolerances.

    max_step applies to the integration variable (sqrt-time for
    essential fields).  start_floor lifts the start of an integration
    whose right-hand side is non-finite exactly at t = 0 and is only
    consulted in that case.
    """

    rtol: float = 1e-10
    atol: float = 1e-30
    max_step: float = 1.0
    barrier_margin: float = 1e-14
    start_floor: float = 1e-12


class VectorField:
    """G(z, t) = (tau(t) - z)(1 - conj(tau(t)) z) p(z, t).

    G(tau(t), t) = 0 whenever tau(t) is interior; tau identically 0
    gives the radial field G = -z p(z, t).
    """

    def __init__(self, driving, herglotz):
        if isinstance(driving, str):
            driving = parse_driving_spec(driving)
        if isinstance(herglotz, str):
            herglotz = parse_herglotz_spec(herglotz)
        if not isinstance(driving, DrivingSpec):
            raise ValidationError(f"driving must be a DrivingSpec, got {driving!r}")
        if not isinstance(herglotz, HerglotzSpec):
            raise ValidationError(f"herglotz must be a HerglotzSpec, got {herglotz!r}")
        self.driving = driving
        self.herglotz = herglotz

    @property
    def is_radial(self) -> bool:
        return self.driving.is_radial

    @property
    def sqrt_time(self) -> bool:
        """Integrate in u = sqrt(t) to absorb the essential head."""
        return isinstance(self.herglotz, EssentialHerglotz) or isinstance(
            self.driving, EssentialDriving)

    def g(self, z, t: float):
        tau = complex(self.driving.tau(t))
        return (tau - z) * (1.0 - np.conj(tau) * z) * self.herglotz.p(z, t)

    def g_dz(self, z, t: float):
        return self.g_pair(z, t)[1]

    def g_pair(self, z, t: float):
        """(G, dG/dz) sharing one evaluation of tau and p."""
        tau = complex(self.driving.tau(t))
        tc = tau.conjugate()
        pz = np.asarray(self.herglotz.p(z, t), dtype=complex)
        dpz = np.asarray(self.herglotz.p_dz(z, t), dtype=complex)
        front = (tau - z) * (1.0 - tc * z)
        g = front * pz
        gd = (2.0 * tc * z - 1.0 - (tau * tc).real) * pz + front * dpz
        return g, gd

    def time_breakpoints(self) -> tuple:
        return tuple(sorted(set(self.driving.time_breakpoints())
                            | set(self.herglotz.time_breakpoints())))

    def __call__(self, z, t: float):
        return self.g(z, t)


def assemble_vector_field(tau, p) -> VectorField:
    """Vector field from a driving spec and a Herglotz spec (either may
    be given as its catalog string)."""
    return VectorField(tau, p)


@dataclass(frozen=True)
class DerivativePair:
    """Flow value phi_{s,t}(z) and its z-derivative along the flow."""

    value: complex
    dz: complex


class _DenseArc:
    """One dense solver arc over [t0, t1] (stored in sqrt-time when the
    field was substituted)."""

    __slots__ = ("t0", "t1", "sol", "sqrt_time")

    def __init__(self, t0: float, t1: float, sol, sqrt_time: bool):
        self.t0 = t0
        self.t1 = t1
        self.sol = sol
        self.sqrt_time = sqrt_time

    def value(self, t: float) -> complex:
        x = math.sqrt(t) if self.sqrt_time else t
        return complex(self.sol(x)[0])


class _ArcChain:
    """Cached contiguous arcs for one (s, z) starting point."""

    __slots__ = ("start", "arcs", "end_time", "end_value")

    def __init__(self, start: float, value: complex):
        self.start = start
        self.arcs = []
        self.end_time = start
        self.end_value = value


class EvolutionTrajectory:
    """Solver handle for phi_{s,t}(z) over one vector field.

    Scalar evolve_point queries cache dense arcs keyed by (s, z) so
    that repeated horizons over one starting point reuse a single
    integration; batched queries integrate a whole vector of starting
    points in one system and skip the cache.  Cached results are pure
    values: hits and misses agree to solver accuracy.  Confine one
    trajectory to one thread, or guard it; distinct trajectories are
    independent.
    """

    def __init__(self, field: VectorField, settings: SolverSettings | None = None):
        if not isinstance(field, VectorField):
            raise ValidationError(f"field must be a VectorField, got {field!r}")
        self.field = field
        self.settings = settings or SolverSettings()
        self._point_cache: dict = {}

    # -- low-level integration -------------------------------------------

    def _check_inputs(self, s: float, t_end: float, z0: np.ndarray) -> None:
        if s < 0.0:
            raise DomainError(f"start time must be nonnegative, got {s}")
        if t_end < s:
            raise DomainError(
                f"backward evolution is out of scope (s = {s}, t = {t_end})")
        if np.any(np.abs(z0) >= 1.0):
            raise DomainError("initial points must lie in the open unit disk")

    def _rhs(self, n_phi: int, variational: bool):
        field = self.field
        if not variational:
            return lambda t, y: np.asarray(field.g(y, t), dtype=complex)

        def rhs(t, y):
            g, gd = field.g_pair(y[:n_phi], t)
            return np.concatenate([g, gd * y[n_phi:]])

        return rhs

    def _solve_segment(self, rhs_t, a: float, b: float, y0: np.ndarray,
                       n_phi: int, t_eval=None, dense: bool = False):
        cfg = self.settings
        subst = self.field.sqrt_time
        if subst:
            xa, xb = math.sqrt(a), math.sqrt(b)
            x_eval = None if t_eval is None else np.sqrt(np.asarray(t_eval))

            def rhs(u, y):
                uu = max(float(u), _U_FLOOR)
                return (2.0 * uu) * rhs_t(uu * uu, y)
        else:
            xa, xb = a, b
            x_eval = t_eval
            rhs = rhs_t
            if a == 0.0 and not np.all(np.isfinite(rhs_t(a, y0))):
                # time-singular head; restart just above it
                xa = min(cfg.start_floor, 0.5 * (b - a))
                if x_eval is not None:
                    x_eval = np.maximum(x_eval, xa)

        def barrier(x, y):
            return (1.0 - cfg.barrier_margin) - float(np.max(np.abs(y[:n_phi])))

        barrier.terminal = True
        barrier.direction = -1.0

        sol = solve_ivp(rhs, (xa, xb), y0, method="RK45", rtol=cfg.rtol,
                        atol=cfg.atol, max_step=cfg.max_step, t_eval=x_eval,
                        dense_output=dense, events=[barrier])
        if sol.status == -1:
            last = float(sol.t[-1]) if sol.t.size else xa
            if subst:
                last = last * last
            raise IntegrationFailureError(
                f"evolution solver failed near t = {last:.6g}: {sol.message}",
                last_time=last)
        if sol.status == 1:
            hit = float(sol.t_events[0][0])
            if subst:
                hit = hit * hit
            raise BarrierViolationError(
                "trajectory reached the unit circle "
                f"(|phi| >= 1 - {cfg.barrier_margin:g} at t = {hit:.6g}); "
                "the exact flow cannot exit the disk, so the solver or the "
                "field data is misconfigured", time=hit)
        return sol

    def _knots(self, a: float, b: float) -> list:
        inner = [x for x in self.field.time_breakpoints() if a < x < b]
        return [a] + inner + [b]

    def _solve_grid(self, s: float, times, z0, variational: bool):
        """Values (and z-derivatives) at ascending times >= s for a flat
        vector of starting points; one integration pass."""
        s = float(s)
        z0 = np.atleast_1d(np.asarray(z0, dtype=complex)).ravel()
        times = np.asarray([float(t) for t in times])
        if times.size and np.any(np.diff(times) < 0.0):
            raise ValidationError("sample times must be ascending")
        self._check_inputs(s, float(times[-1]) if times.size else s, z0)
        n = z0.size
        out = np.empty((times.size, n), dtype=complex)
        dout = np.empty((times.size, n), dtype=complex) if variational else None

        at_start = times <= s
        if np.any(times[at_start] < s):
            raise DomainError("sample times must not precede the start time")
        out[at_start] = z0
        if variational:
            dout[at_start] = 1.0

        todo = np.flatnonzero(~at_start)
        if todo.size == 0:
            return (out, dout) if variational else out

        rhs = self._rhs(n, variational)
        y = np.concatenate([z0, np.ones(n, dtype=complex)]) if variational else z0.copy()
        pos = s
        remaining = list(todo)
        t_end = float(times[todo[-1]])
        for a, b in zip(self._knots(pos, t_end), self._knots(pos, t_end)[1:]):
            inside = [i for i in remaining if a < times[i] <= b]
            eval_pts = sorted({float(times[i]) for i in inside} | {b})
            sol = self._solve_segment(rhs, a, b, y, n, t_eval=np.asarray(eval_pts))
            xs = sol.t if not self.field.sqrt_time else sol.t ** 2
            for i in inside:
                j = int(np.argmin(np.abs(xs - times[i])))
                out[i] = sol.y[:n, j]
                if variational:
                    dout[i] = sol.y[n:, j]
            y = sol.y[:, -1].copy()
            remaining = [i for i in remaining if times[i] > b]
        return (out, dout) if variational else out

    # -- public evaluation -------------------------------------------------

    def evolve_point(self, s: float, t: float, z) -> complex:
        """phi_{s,t}(z) for scalar z, with dense-arc caching."""
        s, t, z = float(s), float(t), complex(z)
        self._check_inputs(s, t, np.asarray([z]))
        if t == s:
            return z
        key = (s, z)
        chain = self._point_cache.get(key)
        if chain is None:
            chain = _ArcChain(s, z)
            self._point_cache[key] = chain
        if t > chain.end_time:
            rhs = self._rhs(1, variational=False)
            for a, b in zip(self._knots(chain.end_time, t),
                            self._knots(chain.end_time, t)[1:]):
                sol = self._solve_segment(
                    rhs, a, b, np.asarray([chain.end_value]), 1, dense=True)
                chain.arcs.append(_DenseArc(a, b, sol.sol, self.field.sqrt_time))
                chain.end_value = complex(sol.y[0, -1])
                chain.end_time = b
        i = bisect_left([arc.t1 for arc in chain.arcs], t)
        arc = chain.arcs[min(i, len(chain.arcs) - 1)]
        return arc.value(min(max(t, arc.t0), arc.t1))

    def evolve_batch(self, s: float, t: float, zs) -> np.ndarray:
        """phi_{s,t} over an array of starting points (one system solve)."""
        zs = np.asarray(zs, dtype=complex)
        flat = self._solve_grid(s, [t], zs, variational=False)[0]
        return flat.reshape(zs.shape)

    def evolve_samples(self, s: float, times, zs) -> np.ndarray:
        """phi_{s,t_j} for ascending t_j; shape (len(times),) + zs.shape."""
        zs = np.asarray(zs, dtype=complex)
        grid = self._solve_grid(s, times, zs, variational=False)
        return grid.reshape((len(grid),) + zs.shape)

    def evolve_with_derivative(self, s: float, t: float, z) -> DerivativePair:
        """Flow value and d phi_{s,t}/dz from the joint variational system."""
        vals, ders = self._solve_grid(s, [t], [complex(z)], variational=True)
        return DerivativePair(complex(vals[0, 0]), complex(ders[0, 0]))

    def evolve_derivative_samples(self, s: float, times, zs):
        """(values, z-derivatives) at ascending times for a vector of
        starting points."""
        zs = np.asarray(zs, dtype=complex)
        vals, ders = self._solve_grid(s, times, zs, variational=True)
        shape = (len(vals),) + zs.shape
        return vals.reshape(shape), ders.reshape(shape)


# -- axioms and derived trajectories -------------------------------------------

def evolve_point(trajectory: EvolutionTrajectory, s: float, t: float, z) -> complex:
    return trajectory.evolve_point(s, t, z)


def evolve_with_derivative(trajectory: EvolutionTrajectory, s: float, t: float,
                           z) -> DerivativePair:
    return trajectory.evolve_with_derivative(s, t, z)


def check_evolution_axioms(trajectory: EvolutionTrajectory, n_samples: int = 100,
                           t_max: float = 3.0, seed: int = 20260401,
                           tolerance: float | None = None) -> ConditionReport:
    """Composition law probe: phi_{s,t} = phi_{u,t} o phi_{s,u} on random
    (s <= u <= t, z); the identity at t = s holds exactly by
    construction and is asserted on the same samples."""
    if tolerance is None:
        tolerance = 10.0 * trajectory.settings.rtol
    rng = np.random.default_rng(seed)
    stu = np.sort(rng.uniform(0.0, t_max, size=(n_samples, 3)), axis=1)
    radii = 0.8 * np.sqrt(rng.uniform(0.0, 1.0, size=n_samples))
    zs = radii * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=n_samples))
    worst = -math.inf
    worst_sample = None
    for (s, u, t), z in zip(stu, zs):
        if trajectory.evolve_point(s, s, z) != z:
            raise ValidationError("identity at t = s must hold exactly")
        direct = trajectory.evolve_point(s, t, z)
        staged = trajectory.evolve_point(u, t, trajectory.evolve_point(s, u, z))
        defect = abs(direct - staged)
        if defect > worst:
            worst = defect
            worst_sample = (complex(z), float(t))
    return ConditionReport(worst <= tolerance, worst, worst_sample, tolerance,
                           label="evolution-axioms",
                           notes=("identity at t = s exact on all samples",))


@dataclass(frozen=True, eq=False)
class SampledTrajectory:
    """Discretely sampled complex path t -> value (linear interpolation
    between samples)."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t: float) -> complex:
        return complex(np.interp(t, self.times, self.values.real)
                       + 1j * np.interp(t, self.times, self.values.imag))


def center_trajectory(trajectory: EvolutionTrajectory, t_max: float,
                      step: float = 0.25) -> SampledTrajectory:
    """Sampled a(t) = phi_{0,t}(0); identically 0 for radial fields."""
    times = np.arange(0.0, float(t_max) + 0.5 * step, step)
    times[-1] = min(times[-1], float(t_max))
    values = trajectory.evolve_samples(0.0, times, np.asarray(0.0j)).ravel()
    return SampledTrajectory(times=times, values=values)


# -- lambda-indexed families ----------------------------------------------------

class LambdaFamily:
    """Evolution families of the rescaled fields G_lambda.

    G_lambda replaces p by its hyperbolic rescaling toward the center
    trajectory; lambda = k gives the base family back, lambda = 0 gives
    a Moebius flow.
    """

    def __init__(self, field: VectorField, k: float, a, settings=None):
        if not isinstance(a, CenterTrajectory):
            a = CenterTrajectory.constant(a)
        self.base_field = field
        self.k = float(k)
        self.center = a
        self.settings = settings or SolverSettings()
        self._trajectories: dict = {}

    def herglotz(self, lam: complex) -> HerglotzSpec:
        return lambda_slice(self.base_field.herglotz, self.k, self.center, lam)

    def field(self, lam: complex) -> VectorField:
        return VectorField(self.base_field.driving, self.herglotz(lam))

    def trajectory(self, lam: complex) -> EvolutionTrajectory:
        key = complex(lam)
        traj = self._trajectories.get(key)
        if traj is None:
            traj = EvolutionTrajectory(self.field(key), self.settings)
            self._trajectories[key] = traj
        return traj

    def evolve(self, lam: complex, s: float, t: float, zs):
        zs = np.asarray(zs, dtype=complex)
        if zs.ndim == 0:
            return self.trajectory(lam).evolve_point(s, t, complex(zs))
        return self.trajectory(lam).evolve_batch(s, t, zs)

    def mobius_slice(self, s: float, t: float, fit_points=None,
                     tolerance: float = 1e-8) -> MobiusTransform:
        """Moebius model of the lambda = 0 flow, fit from three points
        and certified on a fourth through its cross ratio."""
        if fit_points is None:
            fit_points = (0.0 + 0.0j, 0.5 + 0.0j, 0.0 + 0.5j, -0.4 - 0.2j)
        pts = np.asarray(fit_points, dtype=complex)
        if pts.size < 4:
            raise ValidationError("need 4 points: 3 to fit, 1 to certify")
        images = self.trajectory(0.0).evolve_batch(s, t, pts)
        fit = MobiusTransform.from_three_points(pts[:3], images[:3])
        defect = abs(cross_ratio(*images[:4]) - cross_ratio(*pts[:4]))
        if not defect <= tolerance:
            raise CannotInvertError(
                "lambda = 0 flow failed the Moebius cross-ratio certificate "
                f"(defect {defect:.3e} > {tolerance:g})")
        return fit


def lambda_evolution(field: VectorField, k: float, a, lam: complex, s: float,
                     t: float, z, settings=None):
    """phi^lambda_{s,t}(z) for the rescaled field; lambda = k reproduces
    the base flow."""
    return LambdaFamily(field, k, a, settings).evolve(lam, s, t, z)


@dataclass(frozen=True)
class MotionProbeReport:
    """Holomorphic-motion checks for psi_lambda = (phi^0)^{-1} o phi^lambda."""

    identity_defect: float
    min_pair_separation: float
    holomorphy_residual: float
    lam_radius: float
    satisfied: bool
    tolerance_identity: float
    tolerance_holomorphy: float

    def to_dict(self) -> dict:
        return {
            "identity_defect": self.identity_defect,
            "min_pair_separation": self.min_pair_separation,
            "holomorphy_residual": self.holomorphy_residual,
            "lam_radius": self.lam_radius,
            "satisfied": bool(self.satisfied),
            "tolerance_identity": self.tolerance_identity,
            "tolerance_holomorphy": self.tolerance_holomorphy,
        }


def holomorphic_motion_probe(family: LambdaFamily, s: float, t: float,
                             z_points=None, lam_radius: float = 0.25,
                             n_lam: int = 16, tolerance_identity: float = 1e-10,
                             tolerance_holomorphy: float = 1e-8) -> MotionProbeReport:
    """Probe that (lambda, z) -> psi_lambda(z) behaves as a holomorphic
    motion: psi_0 = id on samples, injectivity across the sampled pairs
    at each lambda, and lambda-holomorphy via the circle-mean probe."""
    if z_points is None:
        z_points = 0.5 * np.exp(2j * np.pi * np.arange(8) / 8)
    z_points = np.asarray(z_points, dtype=complex)
    mob = family.mobius_slice(s, t)
    inv = mob.inverse()

    def psi(lam):
        return inv.apply(family.evolve(lam, s, t, z_points))

    identity_defect = float(np.max(np.abs(psi(0.0) - z_points)))

    lam_ring = lam_radius * np.exp(2j * np.pi * np.arange(n_lam) / n_lam)
    table = np.array([psi(lam) for lam in lam_ring])  # (n_lam, n_z)
    center_vals = psi(0.5 * lam_radius * (1.0 + 0.0j))
    # injectivity across sampled pairs, worst over the lambda ring
    min_sep = math.inf
    for row in np.vstack([table, center_vals[None, :]]):
        diffs = np.abs(row[:, None] - row[None, :])
        np.fill_diagonal(diffs, np.inf)
        min_sep = min(min_sep, float(diffs.min()))
    # lambda-holomorphy: mean over the ring vs value at its center (0)
    ring_means = table.mean(axis=0)
    holo = float(np.max(np.abs(ring_means - psi(0.0))))
    ok = (identity_defect <= tolerance_identity and min_sep > 0.0
          and holo <= tolerance_holomorphy)
    return MotionProbeReport(identity_defect, min_sep, holo, lam_radius, ok,
                             tolerance_identity, tolerance_holomorphy)


__all__ = [
    "SolverSettings", "VectorField", "assemble_vector_field", "DerivativePair",
    "EvolutionTrajectory", "evolve_point", "evolve_with_derivative",
    "check_evolution_axioms", "SampledTrajectory", "center_trajectory",
    "LambdaFamily", "lambda_evolution", "MotionProbeReport",
    "holomorphic_motion_probe",
]
