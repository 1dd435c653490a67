"""Total curvature of curves and surfaces in Cartan-Hadamard model spaces.

Modules
-------
spaces      model spaces (E^n, H^n in hyperboloid and Klein charts, H^2 x R,
            a positively curved sphere fixture) and their geodesic calculus
transport   parallel transport, holonomy and parallel frames along curves
curves      total and geodesic curvature, chord fits, curve fixtures
majorize    chord-convex planar majorants and the Schur comparison check
surfaces    discrete shape operators, curvature totals, parallel surfaces
hull        convex hulls in E^3/H^3 and the hull-curvature chain
develop     developing maps of surfaces that are flat on tangent planes
cli         seeded experiment runner (``chgeom --list``)
"""

from ._accel import backend
from .errors import GeometryError
from .spaces import (Euclidean, Hyperbolic, Klein, ProductH2R, SphereFixture, distance,
                     exp_map, geodesic, log_map, make_space, sectional_curvature)

__version__ = "0.1.0"

__all__ = ["Euclidean", "Hyperbolic", "Klein", "ProductH2R", "SphereFixture", "make_space",
           "sectional_curvature", "exp_map", "log_map", "distance", "geodesic",
           "GeometryError", "backend", "__version__"]
