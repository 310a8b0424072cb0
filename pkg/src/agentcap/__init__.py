"""Capacity-constrained principal-agent problems on finite state spaces.

The library enumerates contract/distribution profiles over a simplex lattice,
computes Pareto frontiers and reservation selections, locates the output
scale at which the agent's cost capacity starts to bind, verifies the payoff
comparisons that scale implies, decomposes outputs into debt-plus-equity or
live-or-die legs, and solves the principal's stationarity system. The
``agentcap`` command drives the same operations from scenario files.
"""

from .errors import (
    AgentcapError,
    BudgetExceededError,
    ConfigurationError,
    ConvergenceError,
    DegenerateDiscountError,
    DegenerateFitError,
    DegenerateScalingError,
    DifferentiabilityError,
    EmptyFeasibleSetError,
    EmptySelectionError,
    InteriorityError,
    ScenarioParseError,
    SingularJacobianError,
    UndefinedCostPointError,
    UnsupportedCostError,
    ValidationError,
)
from .model import (
    AgentUtility,
    Contract,
    ContractFamily,
    CostFunction,
    DebtFamily,
    Distribution,
    EffortCost,
    GridFamily,
    LinearShareFamily,
    LiveOrDieFamily,
    MonotoneBoundedSlopeFamily,
    OutputFunction,
    Profile,
    QuadraticCost,
    RelativeEntropyCost,
    Scenario,
    StateSpace,
    TableCost,
    ValidationReport,
    agent_value,
    cost,
    enumeration_points,
    grid_values,
    principal_value,
    simplex_lattice,
    validate_scenario,
)
from .agent import (
    AgentFocResidual,
    BestResponseSet,
    agent_foc_residual,
    best_response_convex,
    best_response_grid,
    fit_agent_multipliers,
)
from .pareto import (
    Enumeration,
    ParetoSet,
    Selection,
    feasible_profiles,
    pareto_filter,
    pareto_set,
    select,
)
from .scaling import (
    AlphaCheck,
    AlphaStarResult,
    InequalitySlacks,
    TheoremReport,
    alpha_star,
    capacity_slack_predicate,
    verify_inequalities,
    verify_theorem,
)
from .capstruct import (
    DebtEquityDecomposition,
    LiveOrDieDecomposition,
    debt_equity_decompose,
    live_or_die_decompose,
    scaled_debt_contract,
    sweep_alpha_star,
)
from .kkt import (
    AffineRepresentation,
    FocResiduals,
    PrincipalFocPoint,
    affine_representation_check,
    make_initial_point,
    phi_identity_gap,
    principal_foc_residual,
    solve_principal_foc,
)
from .discounting import (
    DatedProfile,
    DatedSchedule,
    DiscountPair,
    DiscountedSlacks,
    dated_best_response,
    discounted_inequality_diagnostic,
    discounted_values,
    reduce_single_date,
)
from .cli import load_scenario, save_scenario, scenario_from_dict, scenario_to_dict

__version__ = "0.1.0"

__all__ = [
    "AgentcapError",
    "BudgetExceededError",
    "ConfigurationError",
    "ConvergenceError",
    "DegenerateDiscountError",
    "DegenerateFitError",
    "DegenerateScalingError",
    "DifferentiabilityError",
    "EmptyFeasibleSetError",
    "EmptySelectionError",
    "InteriorityError",
    "ScenarioParseError",
    "SingularJacobianError",
    "UndefinedCostPointError",
    "UnsupportedCostError",
    "ValidationError",
    "AgentUtility",
    "Contract",
    "ContractFamily",
    "CostFunction",
    "DebtFamily",
    "Distribution",
    "EffortCost",
    "GridFamily",
    "LinearShareFamily",
    "LiveOrDieFamily",
    "MonotoneBoundedSlopeFamily",
    "OutputFunction",
    "Profile",
    "QuadraticCost",
    "RelativeEntropyCost",
    "Scenario",
    "StateSpace",
    "TableCost",
    "ValidationReport",
    "agent_value",
    "cost",
    "enumeration_points",
    "grid_values",
    "principal_value",
    "simplex_lattice",
    "validate_scenario",
    "AgentFocResidual",
    "BestResponseSet",
    "agent_foc_residual",
    "best_response_convex",
    "best_response_grid",
    "fit_agent_multipliers",
    "Enumeration",
    "ParetoSet",
    "Selection",
    "feasible_profiles",
    "pareto_filter",
    "pareto_set",
    "select",
    "AlphaCheck",
    "AlphaStarResult",
    "InequalitySlacks",
    "TheoremReport",
    "alpha_star",
    "capacity_slack_predicate",
    "verify_inequalities",
    "verify_theorem",
    "DebtEquityDecomposition",
    "LiveOrDieDecomposition",
    "debt_equity_decompose",
    "live_or_die_decompose",
    "scaled_debt_contract",
    "sweep_alpha_star",
    "AffineRepresentation",
    "FocResiduals",
    "PrincipalFocPoint",
    "affine_representation_check",
    "make_initial_point",
    "phi_identity_gap",
    "principal_foc_residual",
    "solve_principal_foc",
    "DatedProfile",
    "DatedSchedule",
    "DiscountPair",
    "DiscountedSlacks",
    "dated_best_response",
    "discounted_inequality_diagnostic",
    "discounted_values",
    "reduce_single_date",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "__version__",
]
