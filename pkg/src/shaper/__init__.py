"""Energy shaping for mechanical control systems with one unactuated direction.

Exact jet arithmetic, the lambda-equation, closed-loop metric and potential
synthesis, spectral certificates and RK4 validation.
"""

from .errors import ShaperError
from .geometry import MechanicalSystem, christoffel, hessian_at_origin, metric_inverse
from .jets import Jet
from .lambda_solver import (
    LambdaField,
    SolutionSpaceReport,
    closed_loop_metric_from_lambda,
    constant_lambda_residual,
    formal_closed_loop_metric,
    formal_lambda_solve,
    lambda_column,
    lambda_method_residuals,
    phi_G_kernel_basis,
)
from .linear import design_target, kalman_controllable, linearize
from .parsing import lower_to_jet, parse_expression
from .simulator import SimConfig, Trajectory, compare_trajectories, energy_drift, simulate_closed, simulate_open_with_feedback
from .synthesis import (
    Pins,
    ShapingSolution,
    assemble_feedback,
    compatibility_check,
    formal_potential_solve,
    potential_only_synthesize,
    synthesize,
)

__all__ = [
    "ShaperError", "MechanicalSystem", "christoffel", "hessian_at_origin", "metric_inverse", "Jet",
    "LambdaField", "SolutionSpaceReport", "closed_loop_metric_from_lambda", "constant_lambda_residual",
    "formal_closed_loop_metric", "formal_lambda_solve", "lambda_column", "lambda_method_residuals",
    "phi_G_kernel_basis", "design_target", "kalman_controllable", "linearize", "lower_to_jet",
    "parse_expression", "SimConfig", "Trajectory", "compare_trajectories", "energy_drift",
    "simulate_closed", "simulate_open_with_feedback", "Pins", "ShapingSolution", "assemble_feedback",
    "compatibility_check", "formal_potential_solve", "potential_only_synthesize", "synthesize",
]
