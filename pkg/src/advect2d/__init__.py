"""advect2d: characteristics toolkit for the 2D stationary advection
boundary value problem on polygons.

The package classifies a polygon's boundary into inflow/outflow/
characteristic parts under a velocity field, solves beta . grad u + mu u = f
with inflow data by integrating along characteristics, computes the weighted
norms and explicit stability constants of the underlying well-posedness
theory, and checks the trace/energy identities numerically.
"""
from ._backend import backend_name
from .errors import (
    Advect2dError,
    AmbiguousArc,
    AttenuationNotDecayed,
    ConfigError,
    DegenerateArea,
    DomainError,
    EmptySet,
    ExponentOutOfWindow,
    FieldSyntaxError,
    FlowError,
    FootpointOnCharacteristicArc,
    GeometryError,
    HypothesisFailed,
    MissingBoundaryData,
    NonDifferentiable,
    NotVanishing,
    SelfIntersecting,
    SolverError,
    StartOutside,
    StepUnderflow,
    TestFunctionNotAdmissible,
    TooCloseToBoundary,
    UnknownIdentifier,
)
from .geometry import (
    ArcRef,
    Containment,
    Point2,
    PolygonalDomain,
    WrongOrientation,
    build_domain,
    set_distance,
)
from .fields import (
    FieldNorms,
    ScalarField,
    VectorField,
    constant_field,
    divergence,
    estimate_norms,
    eval_field,
    parse_field,
    parse_vector_field,
)
from .characteristics import (
    CHARACTERISTIC,
    INFLOW,
    OUTFLOW,
    BoundaryClassification,
    CharacteristicTrace,
    FlowEngine,
    SolverConfig,
    classify_boundary,
)
from .quadrature import (
    NormReport,
    ProblemContext,
    boundary_rule,
    conjugate,
    domain_rule,
    lp_norm_boundary,
    lp_norm_domain,
    norm_report,
    parse_p,
    render_p,
)
from .solver import (
    BoundaryData,
    SolutionField,
    lift_boundary_data,
    solve_adjoint,
    solve_direct,
    strong_residual,
    trace_recovery_check,
    weak_residual,
)
from .diagnostics import (
    ConstantsReport,
    DensityReport,
    WellPosednessReport,
    check_green_identity,
    check_trace_inequality,
    check_vanishing_trace,
    constants,
    density_condition,
    separation_check,
    sigma_p,
    stability_margins,
    unbounded_trace_demo,
    well_posedness_report,
)
from .corpus import example_names, get_example
from .config import RunConfig, config_from_dict, load_config

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "build_domain",
    "set_distance",
    "parse_field",
    "parse_vector_field",
    "constant_field",
    "divergence",
    "estimate_norms",
    "eval_field",
    "ArcRef",
    "Containment",
    "Point2",
    "PolygonalDomain",
    "ScalarField",
    "VectorField",
    "FieldNorms",
    "WrongOrientation",
    "Advect2dError",
    "INFLOW",
    "OUTFLOW",
    "CHARACTERISTIC",
    "SolverConfig",
    "FlowEngine",
    "CharacteristicTrace",
    "BoundaryClassification",
    "classify_boundary",
    "conjugate",
    "parse_p",
    "render_p",
    "domain_rule",
    "boundary_rule",
    "lp_norm_domain",
    "lp_norm_boundary",
    "ProblemContext",
    "NormReport",
    "norm_report",
    "BoundaryData",
    "SolutionField",
    "solve_direct",
    "solve_adjoint",
    "lift_boundary_data",
    "strong_residual",
    "weak_residual",
    "trace_recovery_check",
    "sigma_p",
    "constants",
    "ConstantsReport",
    "check_trace_inequality",
    "check_green_identity",
    "check_vanishing_trace",
    "separation_check",
    "stability_margins",
    "well_posedness_report",
    "WellPosednessReport",
    "density_condition",
    "DensityReport",
    "unbounded_trace_demo",
    "example_names",
    "get_example",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "__version__",
]
