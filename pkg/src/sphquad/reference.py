"""Adaptive reference integration over spherical triangles and polygons.

Each triangle is split 4-way at its geodesic edge midpoints. A triangle is
accepted once the fixed-degree rule on it agrees with the sum over its four
children to within its share (by area) of the global tolerance; its
children's sum is kept as the value. Because rounding the vertices of a
small triangle already perturbs its area by about ``eps * perimeter``, a
difference below that rounding level (relative to the integral of ``|f|``,
plus the perimeter times ``max |f|``) is also accepted; the estimate
then reports that difference, so tolerances near ``1e-15`` may end with an
estimate somewhat above ``rel_tol * |value|``. Leaves are summed in creation order
with ``math.fsum`` so that results do not depend on scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .geometry import SphericalPolygon, SphericalTriangle, girard_area, normalize, triangulate
from .triangle import spherical_triangle_rule

LEAF_DEGREE = 8
MAX_DEPTH = 30
MAX_TRIANGLES = 2_000_000
ROUNDOFF = 100 * np.finfo(float).eps


@dataclass(frozen=True)
class AdaptiveResult:
    value: float
    error: float
    leaves: int

    def __iter__(self):  # allows ``value, err = adaptive_integrate(...)``
        yield self.value
        yield self.error


def midpoint(a, b):
    return normalize(np.asarray(a) + np.asarray(b))


def subdivide(tri):
    """Four children: three corner triangles and the middle one, all counterclockwise."""
    A, B, C = tri.A, tri.B, tri.C
    ab, bc, ca = midpoint(A, B), midpoint(B, C), midpoint(C, A)
    return (
        SphericalTriangle(A, ab, ca),
        SphericalTriangle(ab, B, bc),
        SphericalTriangle(ca, bc, C),
        SphericalTriangle(ab, bc, ca),
    )


def _as_triangles(region):
    if isinstance(region, SphericalTriangle):
        return [region.oriented()]
    if isinstance(region, SphericalPolygon):
        return triangulate(region)
    if isinstance(region, (list, tuple)) and region and isinstance(region[0], SphericalTriangle):
        return [t.oriented() for t in region]
    arr = np.asarray(region, dtype=float)
    if arr.shape == (3, 3):
        return [SphericalTriangle.from_array(arr).oriented()]
    return triangulate(SphericalPolygon(arr))


def _rule_values(tri, f):
    """Rule value and the rounding level of that value."""
    r = spherical_triangle_rule(tri, LEAF_DEGREE)
    fx = np.abs(np.broadcast_to(f(*r.nodes.T), r.weights.shape))
    V = tri.vertices
    perimeter = float(np.linalg.norm(V - np.roll(V, 1, axis=0), axis=1).sum())
    noise = ROUNDOFF * (float(r.weights @ fx) + perimeter * float(fx.max()))
    return r.integrate(f), noise


def adaptive_integrate(region, f, rel_tol=1e-14, max_depth=MAX_DEPTH):
    """Integrate ``f(x, y, z)`` over a triangle, a polygon or a list of triangles.

    Returns ``(value, error_estimate)``; the estimate sums the accepted
    parent-versus-children differences.
    """
    if rel_tol < 1e-15:
        raise ValueError("rel_tol below 1e-15 is not attainable in double precision")
    tris = _as_triangles(region)
    areas = [girard_area(t) for t in tris]
    total_area = math.fsum(areas)
    coarse = [spherical_triangle_rule(t, LEAF_DEGREE) for t in tris]
    scale = math.fsum(float(r.weights @ np.abs(np.broadcast_to(f(*r.nodes.T), r.weights.shape)))
                      for r in coarse)
    if scale == 0.0:
        scale = 1.0
    budget = rel_tol * scale

    leaves = []  # (creation index, value, error)
    # stack entries: (creation index, triangle, area, rule value, depth)
    stack = [(i, t, a, r.integrate(f), 0) for i, (t, a, r) in enumerate(zip(tris, areas, coarse))]
    stack.reverse()
    counter = len(stack)
    while stack:
        idx, tri, area, q, depth = stack.pop()
        kids = subdivide(tri)
        kv = [_rule_values(k, f) for k in kids]
        kq = [v for v, _ in kv]
        diff = abs(math.fsum(kq) - q)
        floor = math.fsum(a for _, a in kv)
        if diff <= max(budget * area / total_area, floor):
            leaves.append((idx, math.fsum(kq), diff))
            continue
        if depth + 1 >= max_depth or counter > MAX_TRIANGLES:
            partial = math.fsum(v for _, v, _ in leaves) + q + math.fsum(e[3] for e in stack)
            raise ConvergenceError(
                "adaptive subdivision did not converge",
                residual=diff,
                partial_value=partial,
                depth=depth + 1,
            )
        for k, qk in zip(reversed(kids), reversed(kq)):
            stack.append((counter, k, girard_area(k), qk, depth + 1))
            counter += 1
    leaves.sort(key=lambda e: e[0])
    return AdaptiveResult(
        math.fsum(v for _, v, _ in leaves), math.fsum(e for _, _, e in leaves), len(leaves)
    )
