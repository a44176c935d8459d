"""Oligopoly pricing games under deceptive Nash-equilibrium seeking.

The package models N-firm price competition, the model-free seeking dynamics
the firms run, and what happens when a subset of firms injects falsified
probing signals to steer everyone else to a more profitable operating point.
"""

from . import numerics
from .oligopoly import (
    Aggregates,
    OligopolyParams,
    QuadraticGame,
    build_quadratic_game,
    costs,
    derive_aggregates,
    market_game,
    override_own_curvature,
    sales,
)
from .deception import (
    AttainabilityResult,
    AttainabilitySearch,
    DeceptionTopology,
    PerturbedPseudogradient,
    cost_gaps,
    deceptive_equilibrium,
    in_stability_set,
    is_hurwitz,
    lambda_matrix,
    matching_field,
    perturbed_pseudogradient,
    solve_attainability,
)
from .deceptive_game import (
    DeceptiveGame,
    DesirabilityReport,
    NashVerdict,
    build_deceptive_game,
    deceptive_cost,
    deceptive_costs,
    perceived_desirability,
    verify_deceptive_nash,
)
from .dynamics import (
    MODEL_KINDS,
    AveragedResidual,
    DivergenceError,
    NESTuning,
    SimState,
    SteadyState,
    Trajectory,
    averaged_residual,
    common_period,
    common_period_factor,
    default_initial,
    dither_vector,
    rhs,
    simulate,
)
from .scenario import (
    Scenario,
    ScenarioError,
    SimConfig,
    bundled_scenario_path,
    load_scenario,
    scenario_from_dict,
    write_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Aggregates",
    "AttainabilityResult",
    "AttainabilitySearch",
    "AveragedResidual",
    "DeceptionTopology",
    "DeceptiveGame",
    "DesirabilityReport",
    "DivergenceError",
    "MODEL_KINDS",
    "NESTuning",
    "NashVerdict",
    "OligopolyParams",
    "PerturbedPseudogradient",
    "QuadraticGame",
    "Scenario",
    "ScenarioError",
    "SimConfig",
    "SimState",
    "SteadyState",
    "Trajectory",
    "averaged_residual",
    "build_deceptive_game",
    "build_quadratic_game",
    "bundled_scenario_path",
    "common_period",
    "common_period_factor",
    "cost_gaps",
    "costs",
    "deceptive_cost",
    "deceptive_costs",
    "deceptive_equilibrium",
    "default_initial",
    "derive_aggregates",
    "dither_vector",
    "in_stability_set",
    "is_hurwitz",
    "lambda_matrix",
    "load_scenario",
    "market_game",
    "matching_field",
    "numerics",
    "override_own_curvature",
    "perceived_desirability",
    "perturbed_pseudogradient",
    "rhs",
    "sales",
    "scenario_from_dict",
    "simulate",
    "solve_attainability",
    "verify_deceptive_nash",
    "write_scenario",
    "__version__",
]
