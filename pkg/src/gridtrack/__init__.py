"""Error-diffusion resource agents with bounded accumulated error.

A library and closed-loop simulator for real-time grid control: resource
agents that implement ``proj(request - accumulated error)`` so discrete,
uncertain, and delayed devices track continuous setpoint requests with a
provably bounded running error, plus the projected-gradient controller
that steers them.
"""

from .delayed import DelayedAgent
from .diffusion import ErrorState, check_contained, diffuse_step, windowed_tracking_error
from .discrete import (
    ComfortBand,
    DiscreteAgent,
    HeaterAgent,
    HeaterState,
    MultiHeaterAgent,
    heater_implementable,
    heater_transition,
    multi_heater_implementable,
    select_heater_subset,
)
from .errors import (
    AgentContractError,
    ConfigError,
    DomainViolation,
    GeometryError,
    GridTrackError,
    PtiError,
    PtiVerificationError,
    SimulationError,
    SpectralConditionError,
)
from .geometry import (
    Cone,
    ConvexPolygon,
    FiniteSet1D,
    Setpoint,
    TriangleSet,
    convex_hull,
    corner_cones,
    diameter,
    max_stepsize,
    max_stepsize_collection,
    minkowski_sum,
    project_convex,
    project_finite,
)
from .gridagent import (
    GridAgentConfig,
    QuadraticObjective,
    closed_form_y,
    gradient_step,
    optimum,
    theorem_bound,
)
from .scenario import (
    ScenarioConfig,
    ThermalParams,
    irradiance_at,
    load_scenario,
    thermal_step,
)
from .simulate import ScenarioTrace, emit_csv, read_trace_csv, run_scenario
from .uncertain import (
    PvAgent,
    PvParams,
    UncertainAgent,
    construct_pti_superset,
    is_pti_subset,
    minimal_superset,
    pv_error_bound,
    pv_feasible_set,
)

__version__ = "0.1.0"

__all__ = [
    "AgentContractError",
    "ComfortBand",
    "Cone",
    "ConfigError",
    "ConvexPolygon",
    "DelayedAgent",
    "DiscreteAgent",
    "DomainViolation",
    "ErrorState",
    "FiniteSet1D",
    "GeometryError",
    "GridAgentConfig",
    "GridTrackError",
    "HeaterAgent",
    "HeaterState",
    "MultiHeaterAgent",
    "PtiError",
    "PtiVerificationError",
    "PvAgent",
    "PvParams",
    "QuadraticObjective",
    "ScenarioConfig",
    "ScenarioTrace",
    "Setpoint",
    "SimulationError",
    "SpectralConditionError",
    "ThermalParams",
    "TriangleSet",
    "UncertainAgent",
    "check_contained",
    "closed_form_y",
    "construct_pti_superset",
    "convex_hull",
    "corner_cones",
    "diameter",
    "diffuse_step",
    "emit_csv",
    "gradient_step",
    "heater_implementable",
    "heater_transition",
    "irradiance_at",
    "is_pti_subset",
    "load_scenario",
    "max_stepsize",
    "max_stepsize_collection",
    "minimal_superset",
    "minkowski_sum",
    "multi_heater_implementable",
    "optimum",
    "project_convex",
    "project_finite",
    "pv_error_bound",
    "pv_feasible_set",
    "read_trace_csv",
    "run_scenario",
    "select_heater_subset",
    "theorem_bound",
    "thermal_step",
    "windowed_tracking_error",
]
