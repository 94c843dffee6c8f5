"""Closed-form collision and delay models for slotted random access.

All formulas share one kernel: with requests arriving at ``gamma`` Hz over a
pool of ``raos`` slots per second, the per-attempt collision probability is
``p = 1 - exp(-gamma/raos)``. The cell-wide quantities assume collision
events of distinct requests are independent, which makes the expected
colliding-request density exact and the any-collision probability an
approximation. ``expm1``/``log1p`` forms are used throughout so small
``gamma/raos`` ratios do not lose precision to cancellation.

Collision density here always counts colliding *requests* per second (a
2-request pileup contributes 2), never pileup events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import AllocationPlan, Scenario, SharingTopology


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class closed-form predictions under full dedication."""

    collision_rate: float
    success_rate: float
    collision_density: float
    mean_delay: float


@dataclass(frozen=True)
class CellMetrics:
    total_collision_density: float
    collision_probability: float


@dataclass(frozen=True)
class AccessDelay:
    """Mean access delay; ``inclusive`` counts the final (successful) slot
    interval as one backoff period, ``exclusive`` counts retry waits only,
    so ``inclusive - exclusive`` equals the backoff."""

    inclusive: float
    exclusive: float


def simple_collision_rate(ra_density: float, raos: float) -> float:
    """Per-attempt collision probability ``1 - exp(-ra_density/raos)``."""
    if raos <= 0:
        raise ValueError(f"raos must be > 0, got {raos}")
    if ra_density <= 0:
        raise ValueError(f"ra_density must be > 0, got {ra_density}")
    return -math.expm1(-ra_density / raos)


def full_sharing_rate(scenario: Scenario) -> float:
    """Collision rate when every class draws from the whole pool.

    Identical for all classes and equal to the unclassified single-pool
    rate on the summed density.
    """
    return simple_collision_rate(scenario.total_density, scenario.total_raos)


def class_metrics(ra_density: float, raos: float, backoff: float) -> ClassMetrics:
    p = simple_collision_rate(ra_density, raos)
    delay = mean_access_delay(ra_density, raos, backoff)
    return ClassMetrics(
        collision_rate=p,
        success_rate=1.0 - p,
        collision_density=ra_density * p,
        mean_delay=delay.inclusive,
    )


def full_dedication_rates(
    scenario: Scenario, plan: AllocationPlan
) -> dict[int, ClassMetrics]:
    """Per-class metrics with disjoint dedicated pools; classes are fully
    decoupled, so each entry depends only on its own density and share."""
    return {
        cls.id: class_metrics(cls.ra_density, plan.get(cls.id), cls.backoff)
        for cls in scenario.classes
    }


def partial_dedication_rates(
    scenario: Scenario, topology: SharingTopology
) -> dict[int, float]:
    """Per-class collision rate when RAOs may be shared by class subsets.

    A class-i request lands on a uniformly chosen RAO from its usable set;
    the load on one RAO is the sum of gamma_j / #usable_j over the classes
    sharing it, and the class rate averages the per-RAO rates over its set.
    """
    topology.validate_for(scenario)
    load = np.zeros(scenario.total_raos)
    index: dict[int, np.ndarray] = {}
    for cls in scenario.classes:
        slots = np.sort(np.fromiter(topology.usable_sets[cls.id], dtype=np.int64))
        index[cls.id] = slots
        load[slots] += cls.ra_density / len(slots)
    per_slot = -np.expm1(-load)
    return {cid: float(per_slot[slots].mean()) for cid, slots in index.items()}


def cell_collision_density(scenario: Scenario, plan: AllocationPlan) -> float:
    """Expected colliding requests per second over the whole cell (Hz)."""
    return math.fsum(
        cls.ra_density * simple_collision_rate(cls.ra_density, plan.get(cls.id))
        for cls in scenario.classes
    )


def any_collision_probability(density_rate_pairs: Iterable[tuple[float, float]]) -> float:
    """Probability that at least one of the requests collides, given
    (density, per-attempt rate) pairs; each of the ``gamma`` requests is an
    independent trial, so this is 1 - prod (1 - p)^gamma in log space."""
    log_terms = []
    for gamma, p in density_rate_pairs:
        if p >= 1.0:  # a saturated class collides with certainty
            return 1.0
        log_terms.append(gamma * math.log1p(-p))
    return -math.expm1(math.fsum(log_terms))


def cell_collision_probability(scenario: Scenario, plan: AllocationPlan) -> float:
    """Probability that at least one collision occurs in the cell per second,
    assuming collisions of distinct requests are independent."""
    return any_collision_probability(
        (
            cls.ra_density,
            simple_collision_rate(cls.ra_density, plan.get(cls.id)),
        )
        for cls in scenario.classes
    )


def cell_metrics(scenario: Scenario, plan: AllocationPlan) -> CellMetrics:
    return CellMetrics(
        total_collision_density=cell_collision_density(scenario, plan),
        collision_probability=cell_collision_probability(scenario, plan),
    )


def mean_access_delay(ra_density: float, raos: float, backoff: float) -> AccessDelay:
    """Mean access delay of a class with its own pool of ``raos`` slots.

    Attempts collide independently with probability p, retries wait one
    backoff period, so the inclusive delay is backoff/(1 - p), equivalently
    backoff * exp(ra_density/raos).
    """
    if backoff <= 0:
        raise ValueError(f"backoff must be > 0, got {backoff}")
    if raos <= 0:
        raise ValueError(f"raos must be > 0, got {raos}")
    if ra_density <= 0:
        raise ValueError(f"ra_density must be > 0, got {ra_density}")
    try:
        exclusive = backoff * math.expm1(ra_density / raos)
    except OverflowError:
        exclusive = math.inf
    return AccessDelay(inclusive=backoff + exclusive, exclusive=exclusive)
