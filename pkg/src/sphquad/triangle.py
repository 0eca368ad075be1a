"""Positive-interior cubature of near-algebraic degree on a spherical triangle.

The triangle is rotated so that its centroid sits at the north pole and
projected orthogonally onto the xy-plane. There the surface integral
becomes the planar integral of ``f(x, y, g) / g`` with
``g = sqrt(1 - x^2 - y^2)``, taken over three origin-centered elliptical
sectors. ``1/g`` is replaced by a polynomial of degree ``m`` accurate to a
relative ``eps``, so a planar rule exact to degree ``n + m`` suffices; the
lifted weights use the exact ``1/g``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GeometryError, HemisphereError
from .geometry import SphericalTriangle, girard_area, normalize, rotation_to_north
from .rule import CubatureRule
from .sector import elliptical_sectors_rule

_LD = np.longdouble
_PI_LD = _LD("3.141592653589793238462643383279502884")
_GRID = 10_000

DEFAULT_EPS = 1e-15


@dataclass(frozen=True)
class InvGApprox:
    """Chebyshev interpolant ``q(t) ~ 1/sqrt(1 - t)`` on ``[0, t_max]``."""

    cheb_coeffs: np.ndarray
    t_max: float
    epsilon: float
    error: float

    @property
    def degree(self):
        return len(self.cheb_coeffs) - 1

    @property
    def m(self):
        """Bivariate degree of ``q(x^2 + y^2)``."""
        return 2 * self.degree

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.t_max == 0:
            return np.full_like(t, self.cheb_coeffs[0])
        return np.polynomial.chebyshev.chebval(2 * t / self.t_max - 1, self.cheb_coeffs)


def _cheb_coeffs(d, t_max):
    k = np.arange(d + 1, dtype=_LD)
    ang = (k + _LD(0.5)) * _PI_LD / (d + 1)
    t = t_max * (1 + np.cos(ang)) / 2
    fx = 1 / np.sqrt(1 - t)
    c = (2 / _LD(d + 1)) * (np.cos(np.outer(k, ang)) @ fx)
    c[0] /= 2
    return c.astype(float)


def _relative_error(c, t_max, grid):
    """max |q(t) sqrt(1-t) - 1| over the grid, evaluated in extended precision."""
    x = 2 * grid / t_max - 1
    c = c.astype(_LD)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for cj in c[:0:-1]:
        b1, b2 = 2 * x * b1 - b2 + cj, b1
    q = x * b1 - b2 + c[0]
    return float(np.max(np.abs(q * np.sqrt(1 - grid) - 1)))


@lru_cache(maxsize=4096)
def _inv_g_cached(t_max, eps):
    if t_max == 0:
        return InvGApprox(np.ones(1), 0.0, eps, 0.0)
    tm = _LD(t_max)
    grid = np.linspace(0, 1, _GRID).astype(_LD) * tm
    x0 = 2 / t_max - 1
    rho = x0 + np.sqrt(x0 * x0 - 1)
    guess = max(0, int(np.log(1 / eps) / np.log(rho)) - 2)

    def fits(d):
        c = _cheb_coeffs(d, tm)
        e = _relative_error(c, tm, grid)
        return e <= eps, c, e

    d = guess
    ok, c, e = fits(d)
    if ok:
        while d > 0:
            ok2, c2, e2 = fits(d - 1)
            if not ok2:
                break
            d, c, e = d - 1, c2, e2
    else:
        while not ok:
            d += 1
            if d > 2000:
                raise GeometryError("no polynomial approximation of 1/g reaches the tolerance")
            ok, c, e = fits(d)
    return InvGApprox(c, float(t_max), eps, e)


def inv_g_degree(t_max, eps=DEFAULT_EPS):
    """Minimal-degree Chebyshev approximation of ``1/sqrt(1-t)`` on ``[0, t_max]``.

    The degree ``d`` is the smallest for which the relative error on a
    10^4-point grid is at most ``eps``; the bivariate degree is ``m = 2d``.
    """
    if not 0 <= t_max < 1:
        raise HemisphereError("t_max must lie in [0, 1); the region reaches the equator")
    return _inv_g_cached(float(t_max), float(eps))


def _sector_maps(V):
    """Sector maps ``[P_xy, D_xy]`` and angles for the three edges of ``V``."""
    Ms, thetas = [], []
    for i in range(3):
        P, Q = V[i], V[(i + 1) % 3]
        cr = np.cross(P, Q)
        thetas.append(np.arctan2(np.linalg.norm(cr), P @ Q))
        D = normalize(np.cross(cr, P))
        Ms.append([[P[0], D[0]], [P[1], D[1]]])
    return np.array(Ms), np.array(thetas)


def spherical_triangle_rule(tri, n, eps=DEFAULT_EPS, _depth=0):
    """PI-type rule on ``tri``, nearly exact for polynomials of degree ``n``.

    Cardinality is ``3 * ceil((n+m+2)/2) * (n+m+1)`` with ``m`` from
    :func:`inv_g_degree` applied to the triangle's own ``t_max``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if not isinstance(tri, SphericalTriangle):
        tri = SphericalTriangle.from_array(tri)
    tri = tri.oriented()
    tri.check_hemisphere()
    R = rotation_to_north(tri.centroid)
    V = tri.vertices @ R.T
    t_max = float(np.max(V[:, 0] ** 2 + V[:, 1] ** 2))
    m = inv_g_degree(t_max, eps).m
    Ms, thetas = _sector_maps(V)

    if np.any(np.linalg.det(Ms) <= 1e-14):
        # pole outside the projected triangle: split at the centroid
        if _depth > 2:
            raise GeometryError("could not split triangle into well-posed sectors")
        c = tri.centroid
        parts = [
            spherical_triangle_rule(SphericalTriangle(c, tri.B, tri.C), n, eps, _depth + 1),
            spherical_triangle_rule(SphericalTriangle(tri.A, c, tri.C), n, eps, _depth + 1),
            spherical_triangle_rule(SphericalTriangle(tri.A, tri.B, c), n, eps, _depth + 1),
        ]
        return CubatureRule(
            np.concatenate([p.nodes for p in parts]),
            np.concatenate([p.weights for p in parts]),
            degree=n,
            region_area=girard_area(tri),
        )

    planar = elliptical_sectors_rule(n + m, Ms, thetas)
    x, y = planar.nodes[:, 0], planar.nodes[:, 1]
    g = np.sqrt(1.0 - (x * x + y * y))
    lifted = np.column_stack([x, y, g]) @ R
    return CubatureRule(lifted, planar.weights / g, degree=n, region_area=girard_area(tri))


def triangle_rule_size(n, m):
    return 3 * ((n + m + 3) // 2) * (n + m + 1)
