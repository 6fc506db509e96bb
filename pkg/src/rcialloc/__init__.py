"""Antenna allocation for radar/communication integration networks."""

from .allocators import (
    ALGORITHMS,
    SolveReport,
    SolverConfig,
    a2rci,
    a2rci2,
    balanced_weight,
    baseline_greedy,
    baseline_random,
    baseline_uniform,
    brute_force_oracle,
    comm_first_allocation,
    run_algorithm,
    scalarized_value,
)
from .estimators import (
    A2RCI,
    A2RCI2,
    ExhaustiveAllocator,
    GreedyAllocator,
    RandomAllocator,
    UniformAllocator,
)
from .exceptions import (
    CapacityThresholdInfeasibleError,
    InfeasibleError,
    RCIError,
    ScenarioError,
    SearchSpaceTooLargeError,
)
from .model import MetricsReport, Scenario, channel_capacity, evaluate_metrics, validate_allocation
from .pgd import FeasibleRegion, PgdConfig, project_row
from .scenario_io import ScenarioSpec, generate_scenario, read_scenario, write_results, write_scenario

__version__ = "0.1.0"

__all__ = [
    "A2RCI",
    "A2RCI2",
    "ALGORITHMS",
    "CapacityThresholdInfeasibleError",
    "ExhaustiveAllocator",
    "FeasibleRegion",
    "GreedyAllocator",
    "InfeasibleError",
    "MetricsReport",
    "PgdConfig",
    "RCIError",
    "RandomAllocator",
    "Scenario",
    "ScenarioError",
    "ScenarioSpec",
    "SearchSpaceTooLargeError",
    "SolveReport",
    "SolverConfig",
    "UniformAllocator",
    "a2rci",
    "a2rci2",
    "balanced_weight",
    "baseline_greedy",
    "baseline_random",
    "baseline_uniform",
    "brute_force_oracle",
    "channel_capacity",
    "comm_first_allocation",
    "evaluate_metrics",
    "generate_scenario",
    "project_row",
    "read_scenario",
    "run_algorithm",
    "scalarized_value",
    "validate_allocation",
    "write_results",
    "write_scenario",
]
