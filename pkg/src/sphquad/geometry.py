"""Geometry on the unit sphere: points, rotations, gnomonic projection,
spherical triangles and polygons, and triangulation of polygons.

Points are plain ``numpy`` arrays of shape ``(3,)`` (or ``(m, 3)`` for
batches); the containers below only add validation.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely

from .errors import (
    DegeneratePolygonError,
    DegenerateTriangleError,
    HemisphereError,
    InvalidPolygonError,
    ProjectionError,
)

NORTH = np.array([0.0, 0.0, 1.0])

HEMISPHERE_TOL = 1e-10
DEGENERACY_TOL = 1e-14


def normalize(v):
    """Scale a vector (or each row of a matrix) to unit Euclidean norm."""
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def sphere_point(x, y, z):
    return normalize([x, y, z])


def lonlat_to_xyz(lon, lat):
    """Convert longitude/latitude in degrees to unit vectors."""
    lam = np.radians(np.asarray(lon, dtype=float))
    phi = np.radians(np.asarray(lat, dtype=float))
    return np.stack(
        [np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi)], axis=-1
    )


def xyz_to_lonlat(p):
    p = np.asarray(p, dtype=float)
    lon = np.degrees(np.arctan2(p[..., 1], p[..., 0]))
    lat = np.degrees(np.arcsin(np.clip(p[..., 2], -1.0, 1.0)))
    return lon, lat


def triple_product(a, b, c):
    """``a . (b x c)``, formed from edge vectors to keep small triangles accurate."""
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    return np.einsum("...i,...i->...", a, np.cross(b - a, c - a))


def rotation_to_north(c):
    """Proper rotation matrix ``R`` with ``R @ c == (0, 0, 1)``.

    Uses the axis ``c x N`` and angle ``arccos(c . N)``; the poles are
    special-cased (identity, or a half turn about the x axis).
    """
    c = normalize(c)
    axis = np.cross(c, NORTH)
    s = np.linalg.norm(axis)
    cosang = c[2]
    if s < 1e-15:
        if cosang > 0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * kx + (1.0 - cosang) * (kx @ kx)


def tangent_basis(center):
    """Orthonormal basis ``(e1, e2)`` of the plane tangent at ``center``.

    ``(e1, e2, center)`` is right handed, so counterclockwise seen from
    outside the sphere stays counterclockwise in tangent coordinates.
    """
    c = normalize(center)
    u = NORTH if abs(c @ NORTH) <= 1.0 - 1e-10 else np.array([1.0, 0.0, 0.0])
    e1 = normalize(u - (u @ c) * c)
    e2 = np.cross(c, e1)
    return e1, e2


def gnomonic(p, center):
    """Central projection of ``p`` onto the plane tangent at ``center``.

    Returns 2D coordinates in the basis of :func:`tangent_basis`. Accepts a
    single point or an ``(m, 3)`` array.
    """
    p = np.asarray(p, dtype=float)
    c = normalize(center)
    d = p @ c
    if np.any(d <= 1e-12):
        raise ProjectionError("point not in the open hemisphere of the projection center")
    q = p / d[..., None] if p.ndim > 1 else p / d
    e1, e2 = tangent_basis(c)
    return np.stack([q @ e1, q @ e2], axis=-1)


def inverse_gnomonic(xy, center):
    xy = np.asarray(xy, dtype=float)
    c = normalize(center)
    e1, e2 = tangent_basis(c)
    q = c + xy[..., :1] * e1 + xy[..., 1:2] * e2
    return normalize(q)


@dataclass(frozen=True)
class SphericalTriangle:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, normalize(getattr(self, name)))
        if abs(self.det) <= DEGENERACY_TOL:
            raise DegenerateTriangleError("triangle vertices lie on a common great circle")

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1], v[2])

    @property
    def vertices(self):
        return np.stack([self.A, self.B, self.C])

    @property
    def det(self):
        return float(triple_product(self.A, self.B, self.C))

    @property
    def centroid(self):
        return normalize(self.A + self.B + self.C)

    def oriented(self):
        """Same triangle with counterclockwise orientation seen from outside."""
        if self.det > 0:
            return self
        return SphericalTriangle(self.A, self.C, self.B)

    def check_hemisphere(self):
        c = self.centroid
        if np.min(self.vertices @ c) < HEMISPHERE_TOL:
            raise HemisphereError("triangle is not inside an open hemisphere")


def girard_area(tri):
    """Spherical excess of a triangle (its exact area on the unit sphere).

    Evaluated with the Van Oosterom-Strackee half-angle formula, which is
    stable for very small triangles.
    """
    A, B, C = tri.A, tri.B, tri.C
    det = abs(triple_product(A, B, C))
    if det <= DEGENERACY_TOL:
        raise DegenerateTriangleError("degenerate triangle has no well defined area")
    denom = 1.0 + A @ B + B @ C + C @ A
    return float(2.0 * np.arctan2(det, denom))


def _ring(points):
    pts = normalize(np.asarray(points, dtype=float))
    if len(pts) > 1 and np.allclose(pts[0], pts[-1], atol=1e-15, rtol=0):
        pts = pts[:-1]
    return pts


@dataclass(frozen=True)
class SphericalPolygon:
    """Polygon with geodesic edges; outer ring counterclockwise, holes clockwise."""

    vertices: np.ndarray
    holes: tuple = field(default=())

    def __post_init__(self):
        outer = _ring(self.vertices)
        holes = tuple(_ring(h) for h in self.holes)
        object.__setattr__(self, "vertices", outer)
        object.__setattr__(self, "holes", holes)
        for ring in (outer, *holes):
            if len(ring) < 3:
                raise InvalidPolygonError("a ring needs at least three vertices")
            nxt = np.roll(ring, -1, axis=0)
            if np.any(np.linalg.norm(ring - nxt, axis=1) < 1e-15):
                raise InvalidPolygonError("consecutive vertices coincide")
            if np.any(np.einsum("ij,ij->i", ring, nxt) <= -1.0 + 1e-12):
                raise InvalidPolygonError("edge of length pi has no unique geodesic")

    @property
    def all_vertices(self):
        return np.concatenate([self.vertices, *self.holes]) if self.holes else self.vertices

    def oriented(self):
        """Copy with the outer ring counterclockwise and holes clockwise."""
        c = centroid(self)
        outer = self.vertices
        if _signed_area_2d(gnomonic(outer, c)) < 0:
            outer = outer[::-1]
        holes = []
        for h in self.holes:
            holes.append(h[::-1] if _signed_area_2d(gnomonic(h, c)) > 0 else h)
        return SphericalPolygon(outer, tuple(holes))

    def check_hemisphere(self):
        c = centroid(self)
        if np.min(self.all_vertices @ c) < HEMISPHERE_TOL:
            raise HemisphereError(
                "polygon is not contained in an open hemisphere around its centroid"
            )
        return c


def centroid(poly):
    """Normalized arithmetic mean of the outer-ring vertices."""
    mean = np.mean(poly.vertices, axis=0)
    nrm = np.linalg.norm(mean)
    if nrm < 1e-12:
        raise DegeneratePolygonError("vertex mean vanishes; polygon has no centroid")
    return mean / nrm


def _signed_area_2d(xy):
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def triangulate(poly):
    """Split a spherical polygon into non-overlapping spherical triangles.

    The polygon is projected gnomonically onto the plane tangent at its
    centroid, where geodesic edges become straight segments; a constrained
    Delaunay triangulation of the planar image is mapped back vertex by
    vertex. A simple ring with ``L`` vertices and no holes gives ``L - 2``
    triangles.
    """
    c = poly.check_hemisphere()
    rings = [poly.vertices, *poly.holes]
    planar = [gnomonic(r, c) for r in rings]
    lookup = {}
    for ring3, ring2 in zip(rings, planar):
        for p3, p2 in zip(ring3, ring2):
            lookup[(float(p2[0]), float(p2[1]))] = p3

    shape = shapely.Polygon(planar[0], [h for h in planar[1:]])
    if not shape.is_valid:
        raise InvalidPolygonError(
            "projected boundary is not a simple polygon: " + shapely.is_valid_reason(shape)
        )
    pieces = shapely.constrained_delaunay_triangles(shape)
    all2d = np.concatenate(planar)
    all3d = np.concatenate(rings)

    triangles = []
    for piece in shapely.get_parts(pieces):
        coords = np.asarray(piece.exterior.coords)[:3]
        verts = []
        for x, y in coords:
            p = lookup.get((float(x), float(y)))
            if p is None:
                p = all3d[np.argmin(np.sum((all2d - (x, y)) ** 2, axis=1))]
            verts.append(p)
        a, b, cc = verts
        det = triple_product(a, b, cc)
        if abs(det) <= DEGENERACY_TOL:
            continue
        triangles.append(SphericalTriangle(a, b, cc) if det > 0 else SphericalTriangle(a, cc, b))
    return triangles


def polygon_area(poly):
    return float(sum(girard_area(t) for t in triangulate(poly)))


# --- ingestion -------------------------------------------------------------


def _geometry_of(doc):
    kind = doc.get("type")
    if kind == "FeatureCollection":
        for feature in doc["features"]:
            try:
                return _geometry_of(feature)
            except InvalidPolygonError:
                continue
        raise InvalidPolygonError("no Polygon geometry in FeatureCollection")
    if kind == "Feature":
        return _geometry_of(doc["geometry"])
    if kind == "Polygon":
        return doc
    if kind == "MultiPolygon" and len(doc["coordinates"]) == 1:
        return {"type": "Polygon", "coordinates": doc["coordinates"][0]}
    raise InvalidPolygonError(f"unsupported GeoJSON geometry type {kind!r}")


def polygon_from_geojson(doc):
    """Build a polygon from a GeoJSON ``Polygon`` (or Feature wrapping one).

    Coordinates are ``[longitude, latitude]`` in degrees; ring orientation is
    normalized (outer counterclockwise, holes clockwise).
    """
    geom = _geometry_of(doc)
    rings = [lonlat_to_xyz(*np.asarray(r, dtype=float)[:, :2].T) for r in geom["coordinates"]]
    return SphericalPolygon(rings[0], tuple(rings[1:])).oriented()


def polygon_from_lonlat(lonlat):
    lonlat = np.asarray(lonlat, dtype=float)
    return SphericalPolygon(lonlat_to_xyz(lonlat[:, 0], lonlat[:, 1])).oriented()


def load_polygon(path):
    """Read a polygon from a ``.geojson``/``.json`` file or a ``lon,lat`` CSV."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".json", ".geojson") or text.lstrip().startswith("{"):
        return polygon_from_geojson(json.loads(text))
    rows = []
    for row in csv.reader(text.splitlines()):
        if len(row) < 2:
            continue
        try:
            rows.append((float(row[0]), float(row[1])))
        except ValueError:
            continue  # header line
    if len(rows) < 3:
        raise InvalidPolygonError(f"{path}: fewer than three lon,lat rows")
    return polygon_from_lonlat(rows)


def polygon_to_geojson(poly):
    rings = []
    for ring in (poly.vertices, *poly.holes):
        lon, lat = xyz_to_lonlat(ring)
        coords = [[float(a), float(b)] for a, b in zip(lon, lat)]
        rings.append(coords + coords[:1])
    return {"type": "Polygon", "coordinates": rings}


_DATA = Path(__file__).with_name("data")


def builtin_polygon(name):
    """Bundled test regions: ``australia_like`` (169 vertices) and ``americas_like``."""
    path = _DATA / f"{name}.geojson"
    if not path.exists():
        raise FileNotFoundError(f"no bundled polygon named {name!r}")
    return load_polygon(path)
