"""Polyhedral complexes with curvature bounded above.

Build triangle complexes in a model plane, check the CAT gluing conditions,
compute curvature measures and boundary turns, audit Gauss-Bonnet, estimate
distances and run cone-region surgery.
"""

from .complex import Complex, Gluing, build, from_dict, load
from .domain import Domain, load_domain
from .measure import (
    boundary_turn,
    curvature_measure,
    explicit_formula_audit,
    gauss_bonnet_report,
    gauss_bonnet_residual,
    measure_of,
)
from .metric import PointRef, boundary_distortion, distance, flat_distance
from .surgery import comparison_object, extract_cone, splice, surgery_schedule
from .verify import check_admissible, check_cat

__all__ = [
    "Complex",
    "Domain",
    "Gluing",
    "PointRef",
    "boundary_distortion",
    "boundary_turn",
    "build",
    "check_admissible",
    "check_cat",
    "comparison_object",
    "curvature_measure",
    "distance",
    "explicit_formula_audit",
    "extract_cone",
    "flat_distance",
    "from_dict",
    "gauss_bonnet_report",
    "gauss_bonnet_residual",
    "load",
    "load_domain",
    "measure_of",
    "splice",
    "surgery_schedule",
]
