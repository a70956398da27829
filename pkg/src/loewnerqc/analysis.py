"""Numerical Wirtinger calculus, Beltrami fields, the closed-form map
catalog, and Schwarzian-derivative diagnostics.

A planar map F is sampled either from a closed form or from a polar
grid interpolant.  Wirtinger derivatives

    dF  = (F_x - i F_y) / 2,      dbarF = (F_x + i F_y) / 2

come from central differences (4th order by default, Richardson-paired
on h and h/2); within a stencil width of the unit circle the radial leg
switches to a one-sided stencil into the sample's side, because the
complex dilatation mu = dbarF / dF jumps across |z| = 1 (zero inside,
generally nonzero outside).  Near the seam the derivatives are taken in
polar form, dF = e^{-i theta}(F_rho - i F_theta / rho)/2 and its
conjugate-partner, so no sample ever straddles the circle.

The catalog provides interior/exterior formula pairs with their known
dilatations: the slit-type map z/(1-kz)^2, its n-fold symmetrizations
z/(1-kz^n)^{2/n}, and the half-plane power family built from
H(z) = (1+z)/(1-z).  Catalog invariants (seam agreement, normalization
at 0, Jacobian positivity) back the oracle tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import _fd
from .core import MobiusTransform, PolarGrid
from .errors import (
    DegenerateJacobianError,
    DerivativeDegenerateError,
    DomainError,
    TableRangeError,
    ValidationError,
)

_TWO_PI = 2.0 * math.pi


class PlanarMapSampler:
    """Evaluation rule for a planar map at arbitrary complex points.

    Subclasses implement __call__ accepting scalars or arrays and
    returning matching complex values; error_estimate is 0 for closed
    forms and the interpolation error bound for grid-backed samplers.
    """

    error_estimate: float = 0.0

    def __call__(self, z):
        raise NotImplementedError


# -- Wirtinger derivatives -------------------------------------------------------

def _cartesian_wirtinger(func, z, h, order):
    offsets = _fd.CENTRAL_4 if order >= 4 else _fd.CENTRAL_2
    fx = _fd.directional(func, z, h, 1.0, offsets=offsets)
    fy = _fd.directional(func, z, h, 1.0j, offsets=offsets)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def _polar_wirtinger(func, z, h, order, outward):
    """One-sided radial leg (into the sample's side), central angular
    leg; combined through the polar Wirtinger identities."""
    rho = np.abs(z)
    unit = z / rho
    radial_offsets = _fd.ONESIDED_4 if order >= 4 else (0, 1, 2)
    # signed step: offsets 0..4 walk away from the seam on the sample's side
    f_rho = _fd.directional(func, z, h if outward else -h, unit,
                            offsets=radial_offsets)
    angular_offsets = _fd.CENTRAL_4 if order >= 4 else _fd.CENTRAL_2
    # angular samples stay on the circle |w| = rho exactly
    ang = np.asarray(angular_offsets, dtype=float)
    shape = (ang.size,) + np.shape(z)
    pts = np.empty(shape, dtype=complex)
    for i, o in enumerate(ang):
        pts[i] = z * np.exp(1j * o * h)
    vals = np.asarray(func(pts), dtype=complex)
    w = _fd.stencil(tuple(int(o) for o in angular_offsets), 1)
    f_theta = np.tensordot(np.asarray(w), vals, axes=(0, 0)) / h
    df = 0.5 * np.conj(unit) * (f_rho - 1j * f_theta / rho)
    dbar = 0.5 * unit * (f_rho + 1j * f_theta / rho)
    return df, dbar


def _wirtinger_once(func, z, h, order):
    z = np.asarray(z, dtype=complex)
    reach = 2.0 if order >= 4 else 1.0
    dist = np.abs(np.abs(z) - 1.0)
    near = dist <= reach * h * 1.05
    if not np.any(near):
        return _cartesian_wirtinger(func, z, h, order)
    df = np.empty(z.shape, dtype=complex)
    dbar = np.empty(z.shape, dtype=complex)
    far = ~near
    if np.any(far):
        df[far], dbar[far] = _cartesian_wirtinger(func, z[far], h, order)
    outer = near & (np.abs(z) >= 1.0)
    inner = near & (np.abs(z) < 1.0)
    for mask, outward in ((outer, True), (inner, False)):
        if np.any(mask):
            df[mask], dbar[mask] = _polar_wirtinger(func, z[mask], h, order,
                                                    outward)
    return df, dbar


def wirtinger(sampler, z, h: float = 1e-5, order: int = 4,
              richardson: bool = True):
    """(dF, dbarF) at z (scalar or array) by finite differences.

    order 2 or 4; with richardson=True the (h, h/2) pair cancels the
    leading error term.  Stencils never straddle the unit circle.
    """
    if order not in (2, 4):
        raise ValidationError("wirtinger order must be 2 or 4")
    if not h > 0.0:
        raise ValidationError("step h must be positive")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    d1, b1 = _wirtinger_once(sampler, zz, h, order)
    if richardson:
        d2, b2 = _wirtinger_once(sampler, zz, 0.5 * h, order)
        den = 15.0 if order >= 4 else 3.0
        d1 = d2 + (d2 - d1) / den
        b1 = b2 + (b2 - b1) / den
    if scalar:
        return complex(d1[0]), complex(b1[0])
    return d1, b1


# -- Beltrami fields --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BeltramiField:
    """Complex dilatation mu sampled on circles.

    traces has shape (len(radii), angular_count), row i holding
    mu(radii[i] * e^{i theta_j}) at theta_j = 2 pi j / N.  source is
    "closed-form", "grid", or "imported" and drives the classifier's
    default tolerance; error_estimate carries the producing sampler's
    interpolation/extrapolation bound (0 for closed forms).
    """

    radii: tuple
    traces: np.ndarray
    max_dilatation: float
    jacobian_sign_ok: bool
    source: str = "closed-form"
    error_estimate: float = 0.0

    def __post_init__(self):
        traces = np.asarray(self.traces, dtype=complex)
        object.__setattr__(self, "traces", traces)
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if traces.ndim != 2 or traces.shape[0] != len(self.radii):
            raise ValidationError(
                "traces must be a (len(radii), N) array of mu samples")
        if len(set(np.shape(t) for t in traces)) > 1:
            raise ValidationError("per-circle trace length must be constant")

    @property
    def angular_count(self) -> int:
        return int(self.traces.shape[1])

    def trace(self, rho: float) -> np.ndarray:
        for i, r in enumerate(self.radii):
            if abs(r - rho) <= 1e-12 * max(1.0, abs(rho)):
                return self.traces[i]
        raise TableRangeError(f"no sampled circle at rho = {rho}")

    @classmethod
    def from_function(cls, mu_fn, radii, angular_count: int,
                      source: str = "closed-form",
                      error_estimate: float = 0.0) -> "BeltramiField":
        """Sample a closed-form dilatation mu_fn(z) on circles."""
        radii = tuple(float(r) for r in radii)
        angles = _TWO_PI * np.arange(angular_count) / angular_count
        rows = [np.asarray(mu_fn(r * np.exp(1j * angles)), dtype=complex)
                * np.ones(angular_count)
                for r in radii]
        traces = np.vstack(rows)
        return cls(radii=radii, traces=traces,
                   max_dilatation=float(np.max(np.abs(traces))),
                   jacobian_sign_ok=True, source=source,
                   error_estimate=error_estimate)


def beltrami_field(sampler, circles, angular_count: int, h: float = 1e-5,
                   order: int = 4) -> BeltramiField:
    """mu = dbarF / dF sampled on the given circles from a planar map
    sampler; records the maximal dilatation and certifies Jacobian
    positivity |dF|^2 - |dbarF|^2 > 0 at every sample."""
    radii = tuple(float(r) for r in circles)
    if not radii:
        raise ValidationError("need at least one circle radius")
    angles = _TWO_PI * np.arange(angular_count) / angular_count
    traces = np.empty((len(radii), angular_count), dtype=complex)
    for i, r in enumerate(radii):
        zs = r * np.exp(1j * angles)
        df, dbar = wirtinger(sampler, zs, h=h, order=order)
        bad = np.abs(df) <= np.abs(dbar)
        if np.any(bad):
            j = int(np.argmax(bad))
            raise DegenerateJacobianError(
                "Jacobian |dF|^2 - |dbarF|^2 not positive at "
                f"z = {zs[j]:.6g} (|dF| = {abs(df[j]):.3e}, "
                f"|dbarF| = {abs(dbar[j]):.3e})")
        traces[i] = dbar / df
    return BeltramiField(
        radii=radii, traces=traces,
        max_dilatation=float(np.max(np.abs(traces))),
        jacobian_sign_ok=True,
        source="grid" if isinstance(sampler, GridSampler) else "closed-form",
        error_estimate=float(getattr(sampler, "error_estimate", 0.0)))


# -- closed-form catalog -----------------------------------------------------------

def _halfplane_coordinate(z):
    return (1.0 + z) / (1.0 - z)


@dataclass(frozen=True, eq=False)
class ClosedFormMap(PlanarMapSampler):
    """Interior/exterior formula pair with known dilatation.

    interior applies on |z| <= 1 and exterior on |z| >= 1; both are
    continuous across the circle (seam_discrepancy certifies the
    agreement).  mu, when known, is the closed-form dilatation valid
    for |z| > 1 (identically 0 inside).  chain, when known, maps (t, z)
    to the associated Loewner chain value f_t(z).
    """

    name: str
    parameters: dict
    interior: object
    exterior: object
    k_value: float
    mu: object = None
    chain: object = None
    derivative: object = None          # closed interior f'
    schwarzian_closed: object = None   # closed interior Schwarzian
    error_estimate: float = dataclass_field(default=0.0)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(zz.shape, dtype=complex)
        outer = np.abs(zz) > 1.0
        inner = ~outer
        if np.any(inner):
            out[inner] = self.interior(zz[inner])
        if np.any(outer):
            out[outer] = self.exterior(zz[outer])
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    def seam_discrepancy(self, n_angles: int = 256) -> float:
        """sup over the circle of |interior - exterior| (both formulas
        evaluated exactly on |z| = 1)."""
        zs = np.exp(1j * _TWO_PI * np.arange(n_angles) / n_angles)
        return float(np.max(np.abs(np.asarray(self.interior(zs))
                                   - np.asarray(self.exterior(zs)))))


def _f1_parts(k: float):
    def interior(z):
        return z / (1.0 - k * z) ** 2

    def exterior(z):
        u = z / np.abs(z)
        return z / (1.0 - k * u) ** 2

    def mu(z):
        u = z / np.abs(z)
        return np.where(np.abs(z) > 1.0, -k * u ** 3, 0.0j)

    def chain(t, z):
        return np.exp(t) * interior(z)

    def derivative(z):
        return (1.0 + k * z) / (1.0 - k * z) ** 3

    def schwarzian_closed(z):
        return -6.0 * k ** 2 / (1.0 - (k * z) ** 2) ** 2

    return interior, exterior, mu, chain, derivative, schwarzian_closed


def _fn_parts(k: float, n: int):
    ex = 2.0 / n

    def interior(z):
        return z / (1.0 - k * z ** n) ** ex

    def exterior(z):
        u = z / np.abs(z)
        return z / (1.0 - k * u ** n) ** ex

    def mu(z):
        u = z / np.abs(z)
        return np.where(np.abs(z) > 1.0, -k * u ** (n + 2), 0.0j)

    def chain(t, z):
        return np.exp(t) * interior(z)

    return interior, exterior, mu, chain


def _fsigma_parts(sigma: float):
    def interior(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        at_one = np.abs(z - 1.0) < 1e-14
        rest = ~at_one
        out[at_one] = 1.0 / sigma
        if np.any(rest):
            hs = _halfplane_coordinate(z[rest]) ** sigma
            out[rest] = (hs - 1.0) / (hs + 1.0) / sigma
        return out

    def exterior(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        at_one = np.abs(z - 1.0) < 1e-14
        at_minus = np.abs(z + 1.0) < 1e-14
        rest = ~(at_one | at_minus)
        out[at_one] = 1.0 / sigma
        out[at_minus] = -1.0 / sigma
        if np.any(rest):
            w = np.log(-_halfplane_coordinate(z[rest]))  # strip |Im| < pi/2
            e = -np.exp(sigma * w.real + 1j * (2.0 - sigma) * w.imag)
            out[rest] = (e - 1.0) / (e + 1.0) / sigma
        return out

    def mu(z):
        z = np.asarray(z, dtype=complex)
        return np.where(np.abs(z) > 1.0,
                        (sigma - 1.0) * (z ** 2 - 1.0)
                        / (np.conj(z) ** 2 - 1.0),
                        0.0j)

    return interior, exterior, mu


def oracle(name: str, **parameters) -> ClosedFormMap:
    """Closed-form catalog: "f1" (k), "f2" (k), "fn" (k, n),
    "fsigma" (sigma)."""
    name = name.lower()
    if name in ("f1", "f2", "fn"):
        k = float(parameters.get("k", 0.0))
        if not 0.0 <= k < 1.0:
            raise ValidationError(f"k must lie in [0, 1), got {k}")
        if name == "f1":
            n = int(parameters.get("n", 1))
            if n != 1:
                raise ValidationError("f1 is the n = 1 member; use fn")
        elif name == "f2":
            n = int(parameters.get("n", 2))
            if n != 2:
                raise ValidationError("f2 is the n = 2 member; use fn")
        else:
            n = int(parameters.get("n", 1))
        if n < 1:
            raise ValidationError(f"n must be a positive integer, got {n}")
        if n == 1:
            interior, exterior, mu, chain, deriv, schw = _f1_parts(k)
            return ClosedFormMap(name="f1", parameters={"k": k},
                                 interior=interior, exterior=exterior,
                                 k_value=k, mu=mu, chain=chain,
                                 derivative=deriv, schwarzian_closed=schw)
        interior, exterior, mu, chain = _fn_parts(k, n)
        return ClosedFormMap(name="f2" if n == 2 else "fn",
                             parameters={"k": k, "n": n},
                             interior=interior, exterior=exterior,
                             k_value=k, mu=mu, chain=chain)
    if name == "fsigma":
        sigma = float(parameters.get("sigma", 1.0))
        if not 0.0 < sigma < 2.0:
            raise ValidationError(f"sigma must lie in (0, 2), got {sigma}")
        interior, exterior, mu = _fsigma_parts(sigma)
        return ClosedFormMap(name="fsigma", parameters={"sigma": sigma},
                             interior=interior, exterior=exterior,
                             k_value=abs(sigma - 1.0), mu=mu)
    raise ValidationError(f"unknown catalog map {name!r}")


# -- grid-backed sampler -----------------------------------------------------------

class GridSampler(PlanarMapSampler):
    """Bicubic interpolation of annulus grid values in (log rho, theta).

    values has shape (len(radii), N) sampled at theta_j = 2 pi j / N;
    the angular direction is padded periodically.  error_estimate is a
    half-grid probe: a spline on every second radius (and separately
    every second angle) is compared against the skipped samples.
    """

    def __init__(self, radii, values):
        radii = np.asarray([float(r) for r in radii])
        values = np.asarray(values, dtype=complex)
        if radii.ndim != 1 or radii.size < 4:
            raise ValidationError("grid sampler needs at least 4 radii")
        if np.any(np.diff(radii) <= 0.0) or radii[0] <= 0.0:
            raise ValidationError("radii must be positive and ascending")
        if values.shape[0] != radii.size or values.shape[1] < 8:
            raise ValidationError(
                "values must be (len(radii), N >= 8) complex samples")
        self.radii = radii
        self.values = values
        self._x = np.log(radii)
        n = values.shape[1]
        self._n = n
        self._spline_re, self._spline_im = self._build(self._x, values)
        self.error_estimate = self._half_grid_probe()

    @staticmethod
    def _build(x, values):
        n = values.shape[1]
        angles = _TWO_PI * np.arange(n) / n
        pad = 3
        y = np.concatenate([angles[-pad:] - _TWO_PI, angles,
                            angles[:pad] + _TWO_PI])
        v = np.concatenate([values[:, -pad:], values, values[:, :pad]],
                           axis=1)
        kx = min(3, x.size - 1)
        re = RectBivariateSpline(x, y, v.real, kx=kx, ky=3)
        im = RectBivariateSpline(x, y, v.imag, kx=kx, ky=3)
        return re, im

    def _half_grid_probe(self) -> float:
        est = 0.0
        if self.radii.size >= 7:
            re, im = self._build(self._x[::2], self.values[::2])
            xs = self._x[1::2]
            angles = _TWO_PI * np.arange(self._n) / self._n
            approx = (re(xs, angles) + 1j * im(xs, angles))
            est = max(est, float(np.max(np.abs(approx - self.values[1::2]))))
        if self._n >= 16:
            re, im = self._build(self._x, self.values[:, ::2])
            angles = _TWO_PI * np.arange(self._n) / self._n
            odd = angles[1::2]
            approx = (re(self._x, odd) + 1j * im(self._x, odd))
            est = max(est, float(np.max(np.abs(approx
                                               - self.values[:, 1::2]))))
        return est

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        rho = np.abs(zz)
        slack = 1e-12
        if np.any(rho < self.radii[0] * (1.0 - slack)) or \
                np.any(rho > self.radii[-1] * (1.0 + slack)):
            raise TableRangeError(
                "sample outside the grid annulus "
                f"[{self.radii[0]:g}, {self.radii[-1]:g}]")
        x = np.clip(np.log(rho), self._x[0], self._x[-1])
        y = np.mod(np.angle(zz), _TWO_PI)
        vals = (self._spline_re(x, y, grid=False)
                + 1j * self._spline_im(x, y, grid=False))
        out = vals.reshape(zz.shape)
        return complex(out[0]) if scalar else out


# -- Schwarzian derivative ---------------------------------------------------------

def _fd_schwarzian(func, z, h: float):
    d1 = _fd.holomorphic_derivative(func, z, h=h, order=1)
    d2 = _fd.holomorphic_derivative(func, z, h=h, order=2)
    d3 = _fd.holomorphic_derivative(func, z, h=h, order=3)
    small = np.abs(d1) < 1e-12
    if np.any(small):
        zz = np.atleast_1d(np.asarray(z))[np.atleast_1d(small)]
        raise DerivativeDegenerateError(
            f"|f'| below 1e-12 at z = {complex(zz.ravel()[0]):.6g}; "
            "Schwarzian undefined there")
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian(f, z, h: float = 1e-2, method: str = "auto"):
    """Schwarzian derivative S_f = f'''/f' - (3/2)(f''/f')^2 at z.

    method "auto" uses exact knowledge when available (Moebius maps
    have S identically 0; catalog maps may carry a closed form) and
    falls back to high-order differences; "fd" forces the difference
    route (the independent oracle)."""
    if method not in ("auto", "fd"):
        raise ValidationError("schwarzian method must be 'auto' or 'fd'")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if method == "auto":
        if isinstance(f, MobiusTransform):
            out = np.zeros(zz.shape, dtype=complex)
            return complex(out[0]) if scalar else out
        closed = getattr(f, "schwarzian_closed", None)
        if closed is not None:
            out = np.asarray(closed(zz), dtype=complex)
            return complex(out[0]) if scalar else out
    func = f.apply if isinstance(f, MobiusTransform) else \
        (f.interior if isinstance(f, ClosedFormMap) else f)
    out = _fd_schwarzian(func, zz, h)
    return complex(out[0]) if scalar else out


def _default_norm_samples() -> np.ndarray:
    radii = np.linspace(0.0, 0.95, 20)
    angles = np.exp(1j * _TWO_PI * np.arange(32) / 32)
    return np.unique(np.concatenate([[0.0 + 0.0j],
                                     np.outer(radii[1:], angles).ravel()]))


def schwarzian_norm(f, z_samples=None, h: float = 1e-2,
                    method: str = "auto") -> float:
    """sup over samples of (1 - |z|^2)^2 |S_f(z)| (hyperbolically
    weighted Schwarzian norm on the disk)."""
    zs = _default_norm_samples() if z_samples is None else \
        np.asarray(z_samples, dtype=complex).ravel()
    if np.any(np.abs(zs) >= 1.0):
        raise DomainError("Schwarzian norm samples must lie in the disk")
    vals = schwarzian(f, zs, h=h, method=method)
    return float(np.max((1.0 - np.abs(zs) ** 2) ** 2 * np.abs(vals)))


@dataclass(frozen=True)
class SchwarzianReport:
    """Norm and the two quasiconformal-extension bounds.

    necessary_bound: a k-q.c.-extendible map must satisfy
    norm <= 6 k (checked against the declared k).
    sufficient_kprime: norm <= 2 k' guarantees k'-q.c. extendibility,
    so the smallest such threshold is k' = norm / 2 (meaningful when
    below 1)."""

    norm: float
    k_declared: float
    necessary_bound: float
    necessary_ok: bool
    sufficient_kprime: float
    sufficient_applicable: bool

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "k_declared": self.k_declared,
            "necessary_bound": self.necessary_bound,
            "necessary_ok": bool(self.necessary_ok),
            "sufficient_kprime": self.sufficient_kprime,
            "sufficient_applicable": bool(self.sufficient_applicable),
        }


def schwarzian_bounds(f, k: float, z_samples=None, h: float = 1e-2,
                      method: str = "auto") -> SchwarzianReport:
    """Schwarzian norm with the necessary 6k bound for declared k and
    the sufficiency threshold 2k' reported."""
    if not 0.0 <= k < 1.0:
        raise ValidationError(f"k must lie in [0, 1), got {k}")
    norm = schwarzian_norm(f, z_samples=z_samples, h=h, method=method)
    kprime = norm / 2.0
    return SchwarzianReport(norm=norm, k_declared=float(k),
                            necessary_bound=6.0 * float(k),
                            necessary_ok=norm <= 6.0 * float(k) + 1e-12,
                            sufficient_kprime=kprime,
                            sufficient_applicable=kprime < 1.0)


# -- radial chain PDE residual ------------------------------------------------------

def radial_pde_residual(chain_fn, herglotz_spec, z_samples, t_samples,
                        h: float = 1e-3) -> float:
    """max |d f_t(z)/dt - z f_t'(z) p(z,t)|: consistency of a chain
    formula with its Herglotz function under the radial chain PDE."""
    zs = np.asarray(z_samples, dtype=complex).ravel()

    def stacked(ts):
        # chain_fn takes one time; the stencil hands us a batch of them
        return np.stack([chain_fn(float(np.real(tv)), zs) for tv in np.ravel(ts)])

    worst = 0.0
    for t in np.asarray(t_samples, dtype=float).ravel():
        dt = _fd.directional(stacked, t, h, 1.0, offsets=_fd.CENTRAL_4)
        dz = _fd.holomorphic_derivative(lambda w: chain_fn(t, w), zs, h=1e-4)
        res = np.abs(dt - zs * dz * herglotz_spec.p(zs, t))
        worst = max(worst, float(np.max(res)))
    return worst


__all__ = [
    "PlanarMapSampler", "wirtinger", "BeltramiField", "beltrami_field",
    "ClosedFormMap", "oracle", "GridSampler", "schwarzian",
    "schwarzian_norm", "SchwarzianReport", "schwarzian_bounds",
    "radial_pde_residual",
]
