"""Positive interior cubature, compression and hyperinterpolation on spherical polygons."""
from .basis import OrthoBasis, build_ortho_basis, eval_ortho
from .compress import caratheodory_compress
from .errors import (
    ConvergenceError,
    DegeneratePolygonError,
    DegenerateTriangleError,
    GeometryError,
    HemisphereError,
    IllConditionedWarning,
    InvalidPolygonError,
    NumericalError,
    ProjectionError,
    RankDeficiencyError,
    SphquadError,
)
from .geometry import (
    SphericalPolygon,
    SphericalTriangle,
    builtin_polygon,
    centroid,
    girard_area,
    gnomonic,
    load_polygon,
    polygon_area,
    rotation_to_north,
    triangulate,
)
from .harmonics import eval_harmonics
from .hyper import (
    Hyperinterpolant,
    NoiseSpec,
    add_noise,
    evaluate,
    filter_h,
    filtered_hyperinterpolate,
    hybrid_hyperinterpolate,
    hyperinterpolate,
    l2_error,
    lambda_by_rank,
    lasso_hyperinterpolate,
    operator_norm,
    soft_threshold,
)
from .nnls import nnls
from .polygon import polygon_rule
from .quadrature import Rule1D, gauss_legendre, trig_gauss
from .reference import adaptive_integrate
from .rule import CubatureRule
from .sector import EllipticalSector, PlanarRule, circular_sector_rule, elliptical_sector_rule
from .triangle import inv_g_degree, spherical_triangle_rule

__version__ = "0.1.0"
