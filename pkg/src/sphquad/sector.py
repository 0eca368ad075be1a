"""Algebraic cubature on circular sectors of the unit disk and on their
affine images (origin-centered elliptical sectors)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .quadrature import gauss_legendre, trig_gauss_batch


@dataclass(frozen=True)
class PlanarRule:
    nodes: np.ndarray  # (m, 2)
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)

    def integrate(self, f):
        return float(self.weights @ f(self.nodes[:, 0], self.nodes[:, 1]))


@dataclass(frozen=True)
class EllipticalSector:
    """Image under ``M`` of the circular sector ``{r (cos s, sin s): 0<=r<=1, 0<=s<=theta}``."""

    M: np.ndarray
    theta: float

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float).reshape(2, 2)
        object.__setattr__(self, "M", M)
        if abs(np.linalg.det(M)) <= 1e-14:
            raise GeometryError("singular sector map")
        if not 0 < self.theta < np.pi:
            raise GeometryError("sector angle must lie in (0, pi)")


def radial_points(deg):
    return (deg + 3) // 2  # ceil((deg + 2) / 2)


def _sector_grids(deg, thetas):
    """Polar product grids for several sector angles at once."""
    thetas = np.asarray(thetas, dtype=float)
    if np.any(thetas <= 0) or np.any(thetas >= np.pi):
        raise GeometryError("sector angle must lie in (0, pi)")
    radial = gauss_legendre(radial_points(deg), 0.0, 1.0)
    s, ws = trig_gauss_batch(deg, thetas / 2)
    s = s + thetas[:, None] / 2
    r = radial.nodes
    wr = radial.weights * r  # polar Jacobian
    # node order: radial index outer, angular inner
    x = r[None, :, None] * np.cos(s)[:, None, :]
    y = r[None, :, None] * np.sin(s)[:, None, :]
    w = wr[None, :, None] * ws[:, None, :]
    n = len(thetas)
    return x.reshape(n, -1), y.reshape(n, -1), w.reshape(n, -1)


def circular_sector_rule(deg, theta):
    """Rule of exactness ``deg`` on the unit-disk sector of angle ``theta``.

    Product of a radial Gauss-Legendre rule with ``ceil((deg+2)/2)`` points
    (weighted by ``r``) and an angular trigonometric Gaussian rule of degree
    ``deg``; all weights positive, all nodes interior.
    """
    if deg < 0:
        raise ValueError("degree must be nonnegative")
    x, y, w = _sector_grids(deg, [theta])
    return PlanarRule(np.column_stack([x[0], y[0]]), w[0], int(deg))


def elliptical_sector_rule(deg, sec):
    base = circular_sector_rule(deg, sec.theta)
    nodes = base.nodes @ sec.M.T
    return PlanarRule(nodes, abs(np.linalg.det(sec.M)) * base.weights, int(deg))


def elliptical_sectors_rule(deg, Ms, thetas):
    """Concatenated rule over several elliptical sectors sharing one degree."""
    Ms = np.asarray(Ms, dtype=float)
    dets = np.linalg.det(Ms)
    if np.any(np.abs(dets) <= 1e-14):
        raise GeometryError("singular sector map")
    x, y, w = _sector_grids(deg, thetas)
    X = Ms[:, 0, 0, None] * x + Ms[:, 0, 1, None] * y
    Y = Ms[:, 1, 0, None] * x + Ms[:, 1, 1, None] * y
    W = np.abs(dets)[:, None] * w
    return PlanarRule(np.column_stack([X.ravel(), Y.ravel()]), W.ravel(), int(deg))
