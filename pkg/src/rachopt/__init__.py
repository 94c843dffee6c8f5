"""Optimal RAO dedication and collision analytics for grouped random access.

The package splits into:

- :mod:`rachopt.model` - scenario/domain types and the YAML scenario format
- :mod:`rachopt.analytics` - closed-form collision and delay models
- :mod:`rachopt.allocator` - proportional and QoS-driven allocation plans
- :mod:`rachopt.simulator` - seeded Monte-Carlo slotted-access simulator
- :mod:`rachopt.cli` - the ``rachopt`` command-line front end
"""

from .analytics import (
    AccessDelay,
    CellMetrics,
    ClassMetrics,
    any_collision_probability,
    cell_collision_density,
    cell_collision_probability,
    cell_metrics,
    full_dedication_rates,
    full_sharing_rate,
    mean_access_delay,
    partial_dedication_rates,
    simple_collision_rate,
)
from .allocator import (
    AllocationError,
    AllocationOutcome,
    OverloadError,
    brute_force_optimal,
    largest_remainder,
    proportional_allocation,
    reserve_and_divide,
    reserve_for_collision_rate,
    reserve_for_delay,
)
from .model import (
    AllocationPlan,
    DeviceClass,
    QosKind,
    QosTarget,
    Scenario,
    ScenarioError,
    SharingTopology,
    Strategy,
    derive_ra_density,
    load_scenario,
    save_scenario,
    scenario_fingerprint,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)
from .simulator import (
    ArrivalMode,
    ClassStats,
    SimConfig,
    SimStats,
    SimulationError,
    SweepPoint,
    SweepResult,
    run,
    run_delay,
    sweep_dedication,
)

__version__ = "0.1.0"

__all__ = [
    "AccessDelay",
    "AllocationError",
    "AllocationOutcome",
    "AllocationPlan",
    "ArrivalMode",
    "CellMetrics",
    "ClassMetrics",
    "ClassStats",
    "DeviceClass",
    "OverloadError",
    "QosKind",
    "QosTarget",
    "Scenario",
    "ScenarioError",
    "SharingTopology",
    "SimConfig",
    "SimStats",
    "SimulationError",
    "Strategy",
    "SweepPoint",
    "SweepResult",
    "any_collision_probability",
    "brute_force_optimal",
    "cell_collision_density",
    "cell_collision_probability",
    "cell_metrics",
    "derive_ra_density",
    "full_dedication_rates",
    "full_sharing_rate",
    "largest_remainder",
    "load_scenario",
    "mean_access_delay",
    "partial_dedication_rates",
    "proportional_allocation",
    "reserve_and_divide",
    "reserve_for_collision_rate",
    "reserve_for_delay",
    "run",
    "run_delay",
    "save_scenario",
    "scenario_fingerprint",
    "scenario_from_dict",
    "scenario_to_dict",
    "simple_collision_rate",
    "sweep_dedication",
    "validate_scenario",
]
