"""Inner and outer polyhedral approximations of convex vector optimization problems."""

from .approximation import (RunConfig, SolveReport, distance_to_inner, hausdorff_report,
                            run, run_algorithm1, run_algorithm2)
from .cones import OrderingCone, builtin, dual_cone, leq_C, reference_direction
from .errors import CVOPError
from .geometry import Halfspace, Polyhedron, VRep, add_halfspace, contains, dd_enumerate
from .problem import ProblemSpec, catalog, load_problem
from .quadratic import QuadraticFunction
from .scalarization import norm_min, supporting_halfspace, weighted_sum
from .verification import certify, oracle_distance, sample_upper_image

__all__ = [
    "CVOPError", "Halfspace", "OrderingCone", "Polyhedron", "ProblemSpec", "QuadraticFunction",
    "RunConfig", "SolveReport", "VRep", "add_halfspace", "builtin", "catalog", "certify",
    "contains", "dd_enumerate", "distance_to_inner", "dual_cone", "hausdorff_report", "leq_C",
    "load_problem", "norm_min", "oracle_distance", "reference_direction", "run",
    "run_algorithm1", "run_algorithm2", "sample_upper_image", "supporting_halfspace",
    "weighted_sum",
]
