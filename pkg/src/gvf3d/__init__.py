"""3D guiding-vector-field path following.

Builds the guiding field from a pair of implicit surfaces, integrates its
raw, normalized and perturbed flows plus a fixed-wing closed loop, and
numerically certifies convergence, invariance and disturbance-rejection
properties.
"""

from .analysis import (AssumptionReport, FitError, ISSBound, ISSSweep,
                       RateFit, SingularPoint, SingularScan, find_singular_points,
                       fit_convergence, iss_ultimate_bound,
                       phase_portrait_distance, probe_assumptions,
                       project_to_path, tube_samples)
from .autodiff import ADDomainError, Dual2, evaluate_dual
from .dynamics import (AircraftParams, AircraftState, Controls, Disturbance,
                       PlanarDegeneracyError, Trajectory, TrajectoryEvent,
                       aircraft_controller, integrate_aircraft,
                       integrate_flow, integrate_normalized_flow,
                       integrate_perturbed_flow, read_trajectory_csv,
                       wrap_angle)
from .expressions import (ExpressionError, format_expression,
                          parse_expression)
from .field import (FieldDomainError, FieldParams, FieldSample, SetMembership,
                    SingularFieldError, chi_jacobian, classify,
                    jacobian_planar_field, q_matrix, sample_field)
from .integrate import IntegratorConfig
from .paths import (ImplicitPath, ScalarField, builtin_cylinder_intersection,
                    builtin_helix, compile_field, path_from_expressions)
from .scenario import (RunArtifactSet, Scenario, ScenarioError, build_path,
                       load_scenario, run, scenario_hash, scenario_to_toml,
                       simulate)

__version__ = "0.1.0"

__all__ = [
    "ADDomainError",
    "AircraftParams",
    "AircraftState",
    "AssumptionReport",
    "Controls",
    "Disturbance",
    "Dual2",
    "ExpressionError",
    "FieldDomainError",
    "FieldParams",
    "FieldSample",
    "FitError",
    "ISSBound",
    "ISSSweep",
    "ImplicitPath",
    "IntegratorConfig",
    "PlanarDegeneracyError",
    "RateFit",
    "RunArtifactSet",
    "ScalarField",
    "Scenario",
    "ScenarioError",
    "SetMembership",
    "SingularFieldError",
    "SingularPoint",
    "SingularScan",
    "Trajectory",
    "TrajectoryEvent",
    "aircraft_controller",
    "builtin_cylinder_intersection",
    "builtin_helix",
    "build_path",
    "chi_jacobian",
    "classify",
    "compile_field",
    "evaluate_dual",
    "find_singular_points",
    "fit_convergence",
    "format_expression",
    "integrate_aircraft",
    "integrate_flow",
    "integrate_normalized_flow",
    "integrate_perturbed_flow",
    "iss_ultimate_bound",
    "jacobian_planar_field",
    "load_scenario",
    "parse_expression",
    "path_from_expressions",
    "phase_portrait_distance",
    "probe_assumptions",
    "project_to_path",
    "q_matrix",
    "read_trajectory_csv",
    "run",
    "sample_field",
    "scenario_hash",
    "scenario_to_toml",
    "simulate",
    "tube_samples",
    "wrap_angle",
]
