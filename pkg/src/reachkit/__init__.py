"""Reach sets of integrator systems with box-valued inputs.

Exact volume and diameter, support functions, implicit boundaries and
zonotope comparisons for linear systems in Brunovsky normal form.
"""

__version__ = "0.1.0"

from .boundary import (
    BoundaryParams,
    bounding_polynomials,
    boundary_point,
    contains,
    implicitize,
    line_intersection_count,
    rho_map,
    sample_boundary,
)
from .compare import (
    Zonotope,
    benchmark,
    hausdorff_p,
    monte_carlo_volume,
    zonotope_approximant,
    zonotope_diameter,
    zonotope_volume,
)
from .core import InputBox, IntegratorSystem, ReachSpec, RelativeDegree, build_system, state_transition, xi, zeta
from .errors import CapabilityError, NumericError, ReachKitError, ValidationError
from .estimator import IntegratorReachSet
from .poly import MultiPoly, UniPoly, real_roots_in_interval
from .size import critical_time, diameter, size_report, volume
from .support import support_box, support_general, width

__all__ = [
    "BoundaryParams",
    "CapabilityError",
    "InputBox",
    "IntegratorReachSet",
    "IntegratorSystem",
    "MultiPoly",
    "NumericError",
    "ReachKitError",
    "ReachSpec",
    "RelativeDegree",
    "UniPoly",
    "ValidationError",
    "Zonotope",
    "benchmark",
    "boundary_point",
    "bounding_polynomials",
    "build_system",
    "contains",
    "critical_time",
    "diameter",
    "hausdorff_p",
    "implicitize",
    "line_intersection_count",
    "monte_carlo_volume",
    "real_roots_in_interval",
    "rho_map",
    "sample_boundary",
    "size_report",
    "state_transition",
    "support_box",
    "support_general",
    "volume",
    "width",
    "xi",
    "zeta",
    "zonotope_approximant",
    "zonotope_diameter",
    "zonotope_volume",
]
