"""Finite-difference stencils on complex samples.

Coefficients come from solving the Vandermonde moment system, so any
offset pattern and derivative order stays consistent; no hand-copied
magic constants.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def stencil(offsets: tuple, order: int) -> tuple:
    """Weights c_j with sum_j c_j f(x + o_j h) = h^order f^(order)(x) + O(h^m)."""
    o = np.asarray(offsets, dtype=float)
    n = len(o)
    if order >= n:
        raise ValueError("stencil too short for requested derivative order")
    a = np.vander(o, n, increasing=True).T  # a[i, j] = o_j ** i
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return tuple(np.linalg.solve(a, b))

CENTRAL_4 = (-2.0, -1.0, 1.0, 2.0)          # 4th-order first derivative
CENTRAL_2 = (-1.0, 1.0)                      # 2nd-order first derivative
ONESIDED_4 = (0.0, 1.0, 2.0, 3.0, 4.0)       # 4th-order one-sided first derivative
SEPTET = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)


def directional(f, z, h: float, direction: complex, offsets=CENTRAL_4,
                order: int = 1):
    """Derivative of t -> f(z + t*direction) at t=0 by the given stencil.

    f must accept numpy arrays; z may be scalar or array (stencil is
    broadcast on a new leading axis); direction may be scalar or match
    the shape of z.
    """
    w = np.asarray(stencil(tuple(offsets), order), dtype=float)
    zs = np.asarray(z, dtype=complex)
    steps = h * np.asarray(offsets, dtype=float).reshape(
        (len(w),) + (1,) * zs.ndim)
    pts = zs[None, ...] + steps * np.asarray(direction, dtype=complex)
    vals = f(pts)
    return np.tensordot(w, vals, axes=(0, 0)) / h ** order


def holomorphic_derivative(f, z, h: float = 1e-4, order: int = 1,
                           richardson: bool = True):
    """m-th complex derivative of a holomorphic f by real-direction stencils."""
    offsets = SEPTET if order >= 2 else CENTRAL_4
    d1 = directional(f, z, h, 1.0, offsets, order)
    if not richardson:
        return d1
    d2 = directional(f, z, h / 2.0, 1.0, offsets, order)
    # both stencils are 4th order accurate: eliminate the h^4 term
    return d2 + (d2 - d1) / 15.0
