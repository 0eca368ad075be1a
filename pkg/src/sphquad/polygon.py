"""Composite PI-type rules over spherical polygons."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .geometry import SphericalPolygon, girard_area, triangulate
from .rule import CubatureRule
from .triangle import DEFAULT_EPS, spherical_triangle_rule

MAX_DEGREE = 60


def max_workers():
    """Thread cap from ``SPHQUAD_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SPHQUAD_THREADS", "1")))
    except ValueError:
        return 1


def triangle_rules(triangles, n, eps=DEFAULT_EPS):
    workers = min(max_workers(), len(triangles))
    if workers <= 1:
        return [spherical_triangle_rule(t, n, eps) for t in triangles]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda t: spherical_triangle_rule(t, n, eps), triangles))


def polygon_rule(poly, n, eps=DEFAULT_EPS, triangles=None):
    """Uncompressed rule of near-degree ``n`` on ``poly``.

    Concatenates the triangle rules of :func:`~sphquad.geometry.triangulate`
    in triangulation order.
    """
    if not 0 <= n <= MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_DEGREE}]")
    if triangles is None:
        if not isinstance(poly, SphericalPolygon):
            poly = SphericalPolygon(poly)
        triangles = triangulate(poly)
    parts = triangle_rules(triangles, n, eps)
    area = float(sum(girard_area(t) for t in triangles))
    return CubatureRule(
        np.concatenate([p.nodes for p in parts]),
        np.concatenate([p.weights for p in parts]),
        degree=n,
        region_area=area,
    )
