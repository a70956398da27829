"""Unit-disk and right-half-plane geometry primitives.

Moebius transforms with an explicit point at infinity, half-plane
charts used to move between the disk and hyperbolic disks in the right
half-plane, the disk family U(k) = {w : |w - 1| <= k |w + 1|}, the
hyperbolic metric in both models (curvature -4 normalization, so the
density is |dz|/(1 - |z|^2) on the disk and |dw|/(2 Re w) on the
half-plane), and node-centered polar grids for boundary analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChartError, DomainError, ValidationError

ALGEBRAIC_TOL = 1e-12
GEOMETRIC_TOL = 1e-9

# Denominators below this magnitude are treated as an exact pole.
POLE_FLOOR = 1e-300


class _Infinity:
    """Distinguished point at infinity (never an overflowed float)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()


def is_infinity(z) -> bool:
    return z is INFINITY


@dataclass(frozen=True)
class MobiusTransform:
    """Linear-fractional map w -> (a w + b) / (c w + d) with a d - b c != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(self.a), complex(self.b),
                      complex(self.c), complex(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0.0 or abs(a * d - b * c) <= POLE_FLOOR * scale * scale:
            raise ValidationError("degenerate Moebius coefficients (a d = b c)")

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def disk_automorphism(cls, center: complex) -> "MobiusTransform":
        """w -> (w - center) / (1 - conj(center) w), an automorphism of the disk."""
        if abs(center) >= 1.0:
            raise ValidationError("disk automorphism center must lie inside the disk")
        return cls(1.0, -center, -np.conj(center), 1.0)

    @classmethod
    def cayley(cls) -> "MobiusTransform":
        """w -> (1 + w) / (1 - w), disk onto the right half-plane."""
        return cls(1.0, 1.0, -1.0, 1.0)

    @classmethod
    def from_three_points(cls, sources, targets) -> "MobiusTransform":
        """Unique Moebius map sending three distinct sources to three targets."""
        p1, p2, p3 = (complex(w) for w in sources)
        q1, q2, q3 = (complex(w) for w in targets)
        if len({p1, p2, p3}) < 3 or len({q1, q2, q3}) < 3:
            raise ValidationError("three-point Moebius fit needs distinct points")

        def to_zero_one_inf(z1, z2, z3):
            # sends z1 -> 0, z2 -> 1, z3 -> inf
            return cls(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))

        s = to_zero_one_inf(p1, p2, p3)
        t = to_zero_one_inf(q1, q2, q3)
        return t.inverse().compose(s)

    def __call__(self, z):
        """Evaluate at z, which may be INFINITY; poles return INFINITY."""
        if is_infinity(z):
            if abs(self.c) <= POLE_FLOOR:
                return INFINITY
            return self.a / self.c
        z = complex(z)
        den = self.c * z + self.d
        if abs(den) < POLE_FLOOR:
            return INFINITY
        return (self.a * z + self.b) / den

    def apply(self, zs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on finite samples (no pole handling)."""
        zs = np.asarray(zs, dtype=complex)
        return (self.a * zs + self.b) / (self.c * zs + self.d)

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """self after other: (self.compose(other))(z) = self(other(z))."""
        return MobiusTransform(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.d, -self.b, -self.c, self.a)


def mobius_eval(m: MobiusTransform, z):
    """Evaluate a Moebius transform with explicit-infinity semantics."""
    return m(z)


def cross_ratio(z1, z2, z3, z4) -> complex:
    """(z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3)); Moebius invariant."""
    num = (z1 - z3) * (z2 - z4)
    den = (z1 - z4) * (z2 - z3)
    if abs(den) < POLE_FLOOR:
        raise ValidationError("cross ratio undefined: coincident points")
    return num / den


@dataclass(frozen=True)
class HalfPlaneChart:
    """Conformal chart H(z) = ((1 + z)/(1 - z)) Re(a) + i Im(a).

    Maps the unit disk onto the open right half-plane sending 0 to the
    center a; requires Re(a) > 0.
    """

    center: complex

    def __post_init__(self):
        center = complex(self.center)
        object.__setattr__(self, "center", center)
        if not center.real > 0.0:
            raise DegenerateChartError(
                f"chart center must have positive real part, got {center}")

    def forward(self, z):
        z = np.asarray(z, dtype=complex) if isinstance(z, np.ndarray) else complex(z)
        return (1.0 + z) / (1.0 - z) * self.center.real + 1j * self.center.imag

    def inverse(self, w):
        w = np.asarray(w, dtype=complex) if isinstance(w, np.ndarray) else complex(w)
        u = (w - 1j * self.center.imag) / self.center.real
        return (u - 1.0) / (u + 1.0)

    def __call__(self, z):
        return self.forward(z)


@dataclass(frozen=True)
class BeckerDisk:
    """The disk U(k) = {w : |w - 1| <= k |w + 1|} in the right half-plane.

    Equivalently the closed hyperbolic disk centered at 1 of radius
    artanh(k) = (1/2) log((1 + k)/(1 - k)).
    """

    k: float

    def __post_init__(self):
        if not (0.0 <= self.k < 1.0):
            raise ValidationError(f"dilatation bound k must lie in [0, 1), got {self.k}")

    @property
    def hyperbolic_radius(self) -> float:
        return math.atanh(self.k)

    def contains(self, w) -> bool:
        w = complex(w)
        return abs(w - 1.0) <= self.k * abs(w + 1.0)

    def margin(self, w) -> float:
        """|w - 1| - k |w + 1|; nonpositive iff w in U(k)."""
        w = complex(w)
        return abs(w - 1.0) - self.k * abs(w + 1.0)


def hyperbolic_distance_disk(z1, z2) -> float:
    """Distance in the unit disk, density |dz|/(1 - |z|^2)."""
    z1, z2 = complex(z1), complex(z2)
    if abs(z1) >= 1.0 or abs(z2) >= 1.0:
        raise DomainError("hyperbolic distance needs interior points")
    r = abs((z1 - z2) / (1.0 - np.conj(z1) * z2))
    return math.atanh(min(r, 1.0 - 1e-17))


def hyperbolic_distance_halfplane(w1, w2) -> float:
    """Distance in the right half-plane, density |dw|/(2 Re w).

    d(w1, w2) = artanh |(w1 - w2)/(w1 + conj(w2))|; for example
    d(1, 3) = (1/2) log 3.
    """
    w1, w2 = complex(w1), complex(w2)
    if w1.real <= 0.0 or w2.real <= 0.0:
        raise DomainError("half-plane hyperbolic distance needs Re w > 0")
    r = abs((w1 - w2) / (w1 + np.conj(w2)))
    if r >= 1.0:
        return math.inf
    return math.atanh(r)


@dataclass(frozen=True)
class PolarGrid:
    """Node-centered polar grid: radii x angles theta_j = 2 pi j / N.

    Radii are strictly increasing and nonnegative; the angular count is
    a power of two so circle traces feed the FFT without padding.
    """

    radii: tuple
    angular_count: int

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if len(radii) == 0:
            raise ValidationError("polar grid needs at least one radius")
        if any(r < 0.0 for r in radii):
            raise ValidationError("polar grid radii must be nonnegative")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValidationError("polar grid radii must be strictly increasing")
        n = self.angular_count
        if n < 1 or (n & (n - 1)) != 0:
            raise ValidationError(
                f"angular count must be a power of two, got {n}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count

    def circle(self, radius: float) -> np.ndarray:
        return radius * np.exp(1j * self.angles)

    def nodes(self) -> np.ndarray:
        """Complex nodes, shape (len(radii), angular_count), row-major in radius."""
        return np.asarray(self.radii)[:, None] * np.exp(1j * self.angles)[None, :]


def halfplane_chart(center: complex) -> HalfPlaneChart:
    """Chart H(z) = ((1 + z)/(1 - z)) Re(center) + i Im(center); Re(center) > 0."""
    return HalfPlaneChart(center)


def becker_disk_contains(disk: BeckerDisk, w) -> bool:
    """Membership |w - 1| <= k |w + 1| in U(k), boundary inclusive."""
    return disk.contains(w)
