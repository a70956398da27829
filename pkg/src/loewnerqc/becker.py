"""Becker quasiconformal extensions and the Fourier-criterion classifier.

A radial Loewner chain whose Herglotz function stays inside the
hyperbolic disk U(k) = {w : |(w - 1)/(w + 1)| <= k} admits a
k-quasiconformal extension of its initial element across the unit
circle: inside the disk the extension is the chain element at time 0,
and at rho*e^{i*theta} with rho > 1 it is the boundary value of the
chain element at time log(rho).  This module

  * builds that extension on polar grids, reaching the unit circle by
    Richardson extrapolation along radii 1 - delta*2^{-j},
  * classifies Beltrami fields sampled on circles rho > 1 by the
    vanishing of their low-order circle Fourier coefficients (a field
    arises from this construction exactly when every coefficient of
    order n <= 1 vanishes on almost every circle), and
  * reconstructs a Herglotz function from the surviving coefficients,
    inverting the construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .analysis import BeltramiField, GridSampler
from .chains import ChainEvaluator
from .core import PolarGrid
from .errors import (BoundaryResolutionError, NotQuasiconformalError,
                     ReconstructionUnstableError, ValidationError)
from .herglotz import (CoefficientTableHerglotz, HerglotzSpec,
                       check_becker_condition)

_SEAM_GAP = 1e-12   # grid radii must stay off the unit circle by this much

# default circles for classifying a dilatation given as a function
DEFAULT_CLASSIFICATION_RADII = (1.1, 1.5, 2.0, 4.0, 8.0)


# -- boundary extrapolation ---------------------------------------------------------

@dataclass(frozen=True)
class BoundarySettings:
    """How the unit circle is approached from inside.

    Chain elements are evaluated on circles of radius 1 - delta*2^{-j},
    j = 0..levels, and Richardson-extrapolated to radius 1; the final
    correction is kept as the residual.  tolerance bounds the residual
    accepted before a boundary-resolution error is raised.
    """

    delta: float = 0.02
    levels: int = 4
    tolerance: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.levels < 1:
            raise ValidationError("need at least two extrapolation circles")
        if self.tolerance <= 0.0:
            raise ValidationError("boundary tolerance must be positive")

    def offsets(self) -> np.ndarray:
        """Distances from the unit circle, largest first."""
        return self.delta * 0.5 ** np.arange(self.levels + 1)


def _extrapolate_to_zero(x: np.ndarray, table: np.ndarray):
    """Neville polynomial extrapolation of table rows (nodes x) to x = 0.

    table has shape (len(x), ...); returns (limit, residual) where the
    residual is the magnitude of the final Neville correction, a
    per-point error estimate for the limit.
    """
    x = np.asarray(x, dtype=float)
    work = np.array(table, dtype=complex)
    m = len(x)
    if work.shape[0] != m or m < 2:
        raise ValidationError("extrapolation needs two or more nodes")
    best = work[0].copy()
    for k in range(1, m):
        lo, hi = x[: m - k], x[k:]
        shape = (m - k,) + (1,) * (work.ndim - 1)
        num = lo.reshape(shape) * work[1 : m - k + 1] - hi.reshape(shape) * work[: m - k]
        work = num / (lo - hi).reshape(shape)
        prev, best = best, work[0].copy()
    return best, np.abs(best - prev)


# -- the extension grid -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QCExtensionGrid:
    """Quasiconformal extension sampled on a polar grid straddling |z| = 1.

    interior rows hold the time-0 chain element on radii < 1; exterior
    rows hold the extension values on radii > 1.  The seam traces are
    the two one-sided limits at |z| = 1 with their sup discrepancy, and
    error_estimate is the worst boundary-extrapolation residual over
    the exterior fill.
    """

    grid: PolarGrid
    interior_radii: tuple
    interior: np.ndarray
    exterior_radii: tuple
    exterior: np.ndarray
    seam_interior: np.ndarray
    seam_exterior: np.ndarray
    seam_discrepancy: float
    error_estimate: float
    k_declared: float

    @property
    def angular_count(self) -> int:
        return self.grid.angular_count

    def max_radial_jump(self) -> float:
        """Largest exterior value change between adjacent radii at fixed
        angle; a continuity diagnostic for the rho direction."""
        if len(self.exterior_radii) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.exterior, axis=0))))

    def sampler(self) -> GridSampler:
        """Bicubic interpolator over the exterior annulus, carrying this
        grid's boundary residual as its error estimate."""
        sampler = GridSampler(self.exterior_radii, self.exterior)
        sampler.error_estimate = float(
            max(sampler.error_estimate, self.error_estimate))
        return sampler

    def to_dict(self) -> dict:
        def pairs(arr):
            a = np.asarray(arr, dtype=complex)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return {
            "grid": {"radii": [float(r) for r in self.grid.radii],
                     "angular_count": int(self.angular_count)},
            "interior_radii": [float(r) for r in self.interior_radii],
            "interior": pairs(self.interior),
            "exterior_radii": [float(r) for r in self.exterior_radii],
            "exterior": pairs(self.exterior),
            "seam": {"interior": pairs(self.seam_interior),
                     "exterior": pairs(self.seam_exterior),
                     "discrepancy": float(self.seam_discrepancy)},
            "error_estimate": float(self.error_estimate),
            "k_declared": float(self.k_declared),
        }


def _declared_k(p: HerglotzSpec, k: float | None) -> float:
    if k is not None:
        return float(k)
    found = getattr(p, "k", None)
    if found is not None:
        return float(found)
    if isinstance(p, CoefficientTableHerglotz):
        return p.tail_sup()
    raise ValidationError(
        "cannot infer the Becker bound k from this Herglotz spec; pass k=")


def _boundary_trace(evaluator: ChainEvaluator, t: float,
                    angles: np.ndarray, settings: BoundarySettings):
    """Boundary values of the chain element at time t: evaluate on the
    extrapolation circles (one stacked batch, one ODE solve) and
    extrapolate the radius to 1."""
    offsets = settings.offsets()
    ring = np.exp(1j * angles)
    stack = (1.0 - offsets)[:, None] * ring[None, :]
    vals = evaluator.eval_batch(float(t), stack)
    return _extrapolate_to_zero(offsets, vals)


def becker_extend(evaluator: ChainEvaluator, grid: PolarGrid,
                  settings: BoundarySettings | None = None,
                  k: float | None = None, threads: int = 1) -> QCExtensionGrid:
    """Build the quasiconformal extension of a radial chain's initial
    element on a polar grid whose radii straddle the unit circle.

    The chain's Herglotz function must pass the Becker disk condition
    for the declared bound k (taken from the Herglotz object's own
    bound when omitted).
    Interior radii are filled by the normalized chain limit at time 0;
    each exterior radius rho is filled with the boundary values of the
    chain element at time log(rho), and the extrapolation residual is
    reported as the grid's error estimate.

    threads > 1 fills exterior radii concurrently; values are assembled
    by radius index and the residual reduction is a max over the full
    set, so the result is identical to the serial fill.
    """
    settings = settings or BoundarySettings()
    if evaluator.mode != "radial":
        raise ValidationError(
            "the exterior fill needs a radial chain (exterior values are "
            "chain elements at time log rho); got mode "
            f"{evaluator.mode!r}")
    radii = np.asarray(grid.radii, dtype=float)
    if np.any(np.abs(radii - 1.0) < _SEAM_GAP):
        raise ValidationError(
            "grid radii must stay off the unit circle; the seam traces "
            "are reported separately")
    inner = radii[radii < 1.0]
    outer = radii[radii > 1.0]
    if len(inner) == 0 or len(outer) == 0:
        raise ValidationError(
            "grid radii must span both sides of the unit circle")

    p = evaluator.trajectory.field.herglotz
    k_val = _declared_k(p, k)
    report = check_becker_condition(p, k_val)
    if not report.satisfied:
        raise ValidationError(
            "the chain's Herglotz function leaves the Becker disk U(k) "
            f"for k = {k_val:.6g} (worst margin {report.worst_margin:.3e}); "
            "the exterior formula does not define a k-q.c. extension")

    angles = grid.angles
    ring = np.exp(1j * angles)

    # interior: one stacked batch over every inner circle
    inner_nodes = inner[:, None] * ring[None, :]
    interior = evaluator.eval_batch(0.0, inner_nodes)

    # exterior: per radius, extrapolated boundary values at t = log rho
    def _fill(rho: float):
        return _boundary_trace(evaluator, np.log(rho), angles, settings)

    if threads > 1 and len(outer) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            filled = list(pool.map(_fill, outer))
    else:
        filled = [_fill(rho) for rho in outer]

    exterior = np.empty((len(outer), len(angles)), dtype=complex)
    worst_res = 0.0
    worst_theta = 0.0
    for i, (vals, res) in enumerate(filled):
        exterior[i] = vals
        j = int(np.argmax(res))
        if res[j] > worst_res:
            worst_res, worst_theta = float(res[j]), float(angles[j])
    if worst_res > settings.tolerance:
        raise BoundaryResolutionError(
            "boundary extrapolation residual "
            f"{worst_res:.3e} exceeds tolerance {settings.tolerance:.3e} "
            f"(worst at theta = {worst_theta:.6f})",
            worst_theta=worst_theta, residual=worst_res)

    # seam: interior radial limit of the time-0 element ...
    seam_in, res_in = _boundary_trace(evaluator, 0.0, angles, settings)
    # ... against the rho -> 1+ limit of the exterior values
    offsets = settings.offsets()
    outer_traces = np.empty((len(offsets), len(angles)), dtype=complex)
    for j, eps in enumerate(offsets):
        vals, _ = _boundary_trace(evaluator, np.log1p(eps), angles, settings)
        outer_traces[j] = vals
    seam_ex, res_ex = _extrapolate_to_zero(offsets, outer_traces)
    seam_gap = float(np.max(np.abs(seam_in - seam_ex)))
    seam_res = float(max(np.max(res_in), np.max(res_ex)))
    if max(seam_gap, seam_res) > settings.tolerance:
        j = int(np.argmax(np.abs(seam_in - seam_ex)))
        raise BoundaryResolutionError(
            f"seam discrepancy {seam_gap:.3e} (residual {seam_res:.3e}) "
            f"exceeds tolerance {settings.tolerance:.3e} "
            f"(worst at theta = {angles[j]:.6f})",
            worst_theta=float(angles[j]),
            residual=float(max(seam_gap, seam_res)))

    return QCExtensionGrid(
        grid=grid,
        interior_radii=tuple(float(r) for r in inner),
        interior=interior,
        exterior_radii=tuple(float(r) for r in outer),
        exterior=exterior,
        seam_interior=seam_in,
        seam_exterior=seam_ex,
        seam_discrepancy=seam_gap,
        error_estimate=worst_res,
        k_declared=k_val,
    )


# -- circle Fourier analysis --------------------------------------------------------

def circle_fourier(trace):
    """Fourier coefficients of one circle trace.

    trace holds N samples at angles 2*pi*j/N (N a power of two).
    Returns (orders, coefficients) with orders n in [-N/2, N/2) and
    a_n the trapezoid value of (1/2pi) * integral e^{-in theta} mu dtheta,
    which is exact for trigonometric polynomials of degree < N/2.
    """
    trace = np.asarray(trace, dtype=complex).ravel()
    n = trace.size
    if n < 2 or (n & (n - 1)) != 0:
        raise ValidationError(
            f"trace length must be a power of two >= 2, got {n}")
    coeffs = np.fft.fftshift(np.fft.fft(trace)) / n
    orders = np.arange(-(n // 2), n // 2)
    return orders, coeffs


@dataclass(frozen=True, eq=False)
class BeckerReport:
    """Classifier verdict for a Beltrami field sampled on circles.

    table[i] holds the Fourier coefficients of the trace on circle
    radii[i], indexed by orders.  The field comes from the chain
    construction exactly when every coefficient of order n <= 1
    vanishes; worst_* single out the largest such coefficient.
    """

    is_becker: bool
    radii: tuple
    orders: np.ndarray
    table: np.ndarray
    worst_order: int
    worst_radius: float
    worst_magnitude: float
    tolerance: float
    max_dilatation: float
    notes: tuple = dc_field(default_factory=tuple)

    def coefficients(self, rho: float) -> np.ndarray:
        for r, row in zip(self.radii, self.table):
            if abs(r - rho) < 1e-12:
                return row
        raise ValidationError(f"no sampled circle at radius {rho}")

    def to_dict(self) -> dict:
        return {
            "is_becker": bool(self.is_becker),
            "radii": [float(r) for r in self.radii],
            "orders": [int(n) for n in self.orders],
            "coefficients": np.stack(
                [self.table.real, self.table.imag], axis=-1).tolist(),
            "worst": {"order": int(self.worst_order),
                      "radius": float(self.worst_radius),
                      "magnitude": float(self.worst_magnitude)},
            "tolerance": float(self.tolerance),
            "max_dilatation": float(self.max_dilatation),
            "notes": list(self.notes),
        }


def classify_becker(field: BeltramiField,
                    tolerance: float | None = None) -> BeckerReport:
    """Decide whether a Beltrami field over circles rho > 1 arises from
    the chain construction: all circle Fourier coefficients of order
    n <= 1 must vanish (up to tolerance).

    tolerance defaults to 1e-9 for closed-form fields and to
    max(1e-3, 10 * error_estimate) for numerically produced ones, so
    model error and arithmetic error stay separated.  The closed-form
    default presumes the angular resolution leaves the trace's aliased
    Fourier tail below the tolerance; dilatations whose coefficients
    decay slowly (circles close to |z| = 1) need more samples.
    """
    radii = np.asarray(field.radii, dtype=float)
    if len(radii) < 3:
        raise ValidationError(
            f"classification needs at least 3 circles, got {len(radii)}")
    if np.any(radii <= 1.0):
        raise ValidationError("classification circles must have radius > 1")
    if field.angular_count < 64:
        raise ValidationError(
            f"need >= 64 angular samples, got {field.angular_count}")
    if field.max_dilatation >= 1.0:
        raise NotQuasiconformalError(
            f"max |mu| = {field.max_dilatation:.6g} >= 1; "
            "not a quasiconformal dilatation")

    if tolerance is None:
        if field.source == "closed-form" and field.error_estimate == 0.0:
            tolerance = 1e-9
        else:
            tolerance = max(1e-3, 10.0 * float(field.error_estimate))

    rows = []
    orders = None
    for trace in field.traces:
        orders, coeffs = circle_fourier(trace)
        rows.append(coeffs)
    table = np.asarray(rows)

    low = orders <= 1
    mags = np.abs(table[:, low])
    flat = int(np.argmax(mags))
    i, j = np.unravel_index(flat, mags.shape)
    worst_mag = float(mags[i, j])
    worst_order = int(orders[low][j])
    worst_radius = float(radii[i])

    notes = []
    if field.source != "closed-form":
        notes.append(
            "assumes the sampled field is the dilatation of a global "
            "quasiconformal homeomorphism fixing infinity; homeomorphy "
            "itself is not verified numerically")
    if worst_mag > tolerance and worst_order == -(field.angular_count // 2):
        notes.append(
            "worst offender sits in the Nyquist bin, which also collects "
            "aliased high-order content; if the dilatation's Fourier tail "
            "decays slowly on this circle, retry with more angular samples")

    return BeckerReport(
        is_becker=bool(worst_mag <= tolerance),
        radii=tuple(float(r) for r in radii),
        orders=orders,
        table=table,
        worst_order=worst_order,
        worst_radius=worst_radius,
        worst_magnitude=worst_mag,
        tolerance=float(tolerance),
        max_dilatation=float(field.max_dilatation),
        notes=tuple(notes),
    )


# -- Herglotz recovery --------------------------------------------------------------

def recover_herglotz_from_mu(field: BeltramiField,
                             tolerance: float | None = None,
                             tail_ratio_cap: float = 0.05,
                             tail_floor: float = 1e-8,
                             trim: bool = True) -> CoefficientTableHerglotz:
    """Invert the construction: from a Becker field's circle traces,
    rebuild the Herglotz function of the generating chain.

    Per circle of radius rho (time t = log rho), the coefficients of
    order n >= 2 assemble the bounded holomorphic function
    phi(zeta) = sum a_n zeta^n whose boundary values the trace
    represents; the Herglotz function is
    p(z, t) = (1 + phi(z)/z^2) / (1 - phi(z)/z^2).  Recovery is refused
    when the coefficient tail fails to decay (the trace then does not
    represent such boundary values at this resolution).

    With trim=True (default), trailing coefficients whose magnitude
    never exceeds the classifier tolerance are dropped: they are
    indistinguishable from zero at the field's resolution, and keeping
    them only injects noise into p and slows its evaluation.  The
    tail-decay check always runs on the untrimmed coefficients.
    """
    report = classify_becker(field, tolerance=tolerance)
    if not report.is_becker:
        raise ValidationError(
            "only Becker fields determine a Herglotz function; classifier "
            f"found |a_{report.worst_order}| = {report.worst_magnitude:.3e} "
            f"at rho = {report.worst_radius} "
            f"(tolerance {report.tolerance:.3e})")

    orders = report.orders
    n_half = field.angular_count // 2
    keep = orders >= 2
    quarter = max(2, n_half // 2)

    order = np.argsort(report.radii)
    rows = []
    for radius, coeffs in zip(np.asarray(report.radii)[order],
                              report.table[order]):
        row = coeffs[keep]            # c_2 .. c_{N/2 - 1}
        mags = np.abs(row)
        head = float(np.max(mags[: quarter - 2])) if quarter > 2 else 0.0
        tail = float(np.max(mags[quarter - 2:])) if quarter - 2 < len(mags) else 0.0
        if tail > tail_floor and tail > tail_ratio_cap * head:
            raise ReconstructionUnstableError(
                f"Fourier tail on circle rho = {radius} does not decay "
                f"(head {head:.3e}, tail {tail:.3e}); trace does not "
                "resolve boundary values of a bounded holomorphic function")
        rows.append(row)

    table = np.asarray(rows)
    if trim:
        resolved = np.any(np.abs(table) > report.tolerance, axis=0)
        length = int(np.max(np.nonzero(resolved)[0])) + 1 if np.any(resolved) else 1
        table = table[:, :length]

    times = np.log(np.asarray(report.radii, dtype=float)[order])
    spec = CoefficientTableHerglotz(
        times, table,
        note=f"recovered from {len(rows)} circle traces")
    k_obs = spec.tail_sup()
    if k_obs >= 1.0:
        raise ReconstructionUnstableError(
            f"reconstructed tail has sup |phi| = {k_obs:.6g} >= 1; "
            "no Herglotz function with a valid Becker bound fits")
    return spec


__all__ = [
    "BoundarySettings", "QCExtensionGrid", "becker_extend",
    "circle_fourier", "BeckerReport", "classify_becker",
    "recover_herglotz_from_mu", "DEFAULT_CLASSIFICATION_RADII",
]
