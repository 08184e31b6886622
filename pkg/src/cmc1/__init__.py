"""Two-ended CMC-1 surfaces in H^3 and CMC-1 faces in de Sitter space of genus k.

The surfaces are built on the curve w^(k+1) = z ((z - 1/lam)/(lam - z))^k by
integrating the frame equation along paths in the z-plane and solving the
one-parameter closing condition h1(c) = h2(c).
"""

from ._backend import BACKEND
from .curve import CurveParams, SurfacePoint, make_params, hopf_coefficient, gauss_map
from .errors import (
    CMCError,
    DegenerateDenominatorError,
    ExcludedRootError,
    IntegrationError,
    MalformedMonodromyError,
    NoSignChangeError,
    ParameterError,
    PathError,
    SpuriousRootError,
)
from .geometry import AmbientPoint, MeshData, build_mesh, euclidean_period, export_mesh, immerse
from .monodromy import H3, DS_ELLIPTIC, DS_HYPERBOLIC, DS_PARABOLIC, closing_pair, phi1, phi2
from .solver import SolveResult, find_root, scan, solve_all, solve_target, table
from .transport import make_path_c1, make_path_c2, transport

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CurveParams",
    "SurfacePoint",
    "make_params",
    "hopf_coefficient",
    "gauss_map",
    "CMCError",
    "DegenerateDenominatorError",
    "ExcludedRootError",
    "IntegrationError",
    "MalformedMonodromyError",
    "NoSignChangeError",
    "ParameterError",
    "PathError",
    "SpuriousRootError",
    "AmbientPoint",
    "MeshData",
    "build_mesh",
    "euclidean_period",
    "export_mesh",
    "immerse",
    "H3",
    "DS_ELLIPTIC",
    "DS_HYPERBOLIC",
    "DS_PARABOLIC",
    "closing_pair",
    "phi1",
    "phi2",
    "SolveResult",
    "find_root",
    "scan",
    "solve_all",
    "solve_target",
    "table",
    "make_path_c1",
    "make_path_c2",
    "transport",
]
