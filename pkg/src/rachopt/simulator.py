"""Seeded Monte-Carlo simulator for slotted random access.

Each simulated second is partitioned into ``total_raos`` slots. Every class
draws its request count for the second (aggregate Poisson by default, or one
Bernoulli trial per group coordinator), each request picks a slot uniformly
from the class's usable pool, and every request sharing a slot with another
one counts as collided. Collision statistics are therefore measured on fresh
requests only, matching the closed-form model.

Randomness for (iteration, class) comes from its own child stream of the
master seed, so results are bitwise reproducible no matter how iterations
are scheduled, and sweeps over allocation plans reuse identical arrival
patterns (common random numbers).

Delay measurement retries collided requests after the class backoff until
success or the attempt cap. Retries probe the slot occupancy produced by
fresh arrivals but do not add to it: the closed-form delay model assumes
every attempt faces the same fresh-traffic collision probability, and a
simulator that fed retries back into the load would be unstable at high
rates rather than converge to that model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from . import analytics
from .model import AllocationPlan, DeviceClass, Scenario, SharingTopology, Strategy


class SimulationError(RuntimeError):
    """The simulation request is inconsistent with the scenario or config."""


class ArrivalMode(str, Enum):
    POISSON_AGGREGATE = "poisson_aggregate"
    PER_DEVICE_BERNOULLI = "per_device_bernoulli"


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo controls.

    ``horizon`` is the simulated duration of one iteration in whole seconds.
    ``max_attempts`` caps retries per request when delays are measured;
    requests still unresolved are reported as censored.
    """

    iterations: int = 500
    seed: int = 0
    horizon: int = 1
    arrival_mode: ArrivalMode = ArrivalMode.POISSON_AGGREGATE
    measure_delay: bool = False
    max_attempts: int = 25

    def validate(self) -> None:
        if self.iterations < 1:
            raise SimulationError(f"iterations must be >= 1, got {self.iterations}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise SimulationError(
                f"horizon must be a whole number of seconds >= 1, got {self.horizon}"
            )
        if self.max_attempts < 1:
            raise SimulationError(f"max_attempts must be >= 1, got {self.max_attempts}")


@dataclass(frozen=True)
class ClassStats:
    """Empirical per-class statistics pooled over all iterations.

    ``collision_rate`` is collided/attempts over fresh requests; standard
    errors come from the spread of per-iteration estimates. Delay fields are
    None unless the run measured delays.
    """

    attempts: int
    collided: int
    collision_rate: float
    rate_stderr: float
    collision_density: float
    density_stderr: float
    mean_delay: float | None = None
    delay_stderr: float | None = None
    censored: int = 0

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.attempts if self.attempts else 0.0


@dataclass(frozen=True)
class SimStats:
    """Cell-wide simulation outcome.

    ``total_density`` sums the per-class collision densities (colliding
    requests per second); ``event_density`` counts slots holding two or more
    requests instead, for comparison with event-based accounting.
    """

    per_class: dict[int, ClassStats]
    total_density: float
    total_density_stderr: float
    event_density: float
    event_density_stderr: float
    iterations: int
    horizon: int
    seed: int


@dataclass(frozen=True)
class SweepPoint:
    l_value: int
    plan: AllocationPlan
    stats: SimStats
    analytic_density: dict[int, float]
    analytic_total: float


@dataclass(frozen=True)
class SweepResult:
    class_id: int
    points: tuple[SweepPoint, ...]
    empirical_optimum: int


@dataclass(frozen=True)
class _Pool:
    """Resolved per-class sampling context for one run."""

    cls: DeviceClass
    size: int
    offset: int = 0
    slots: np.ndarray | None = None  # explicit slot ids for partial topologies
    coordinators: int = 0
    attempt_prob: float = 0.0

    def pick(self, u: np.ndarray) -> np.ndarray:
        # floor(u * size), clamped: the maximal double in [0, 1) can round
        # the product up to size itself for power-of-two pool sizes
        local = np.minimum((u * self.size).astype(np.int64), self.size - 1)
        if self.slots is not None:
            return self.slots[local]
        return self.offset + local


def _stream(seed: int, iteration: int, class_id: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(iteration, class_id))
    )


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return 0.0, 0.0
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def _build_pools(
    scenario: Scenario,
    allocation: AllocationPlan | SharingTopology | None,
    config: SimConfig,
) -> list[_Pool]:
    strategy = scenario.strategy
    if strategy == Strategy.FULL_DEDICATION:
        if not isinstance(allocation, AllocationPlan):
            raise SimulationError("full dedication requires an AllocationPlan")
        allocation.validate_for(scenario)
        pools = []
        offset = 0
        for cls in scenario.classes:
            count = allocation.get(cls.id)
            pools.append(_Pool(cls=cls, size=count, offset=offset))
            offset += count
    elif strategy == Strategy.FULL_SHARING:
        if allocation is not None:
            raise SimulationError("full sharing takes no plan or topology")
        pools = [
            _Pool(cls=cls, size=scenario.total_raos, offset=0)
            for cls in scenario.classes
        ]
    else:
        if not isinstance(allocation, SharingTopology):
            raise SimulationError("partial dedication requires a SharingTopology")
        allocation.validate_for(scenario)
        pools = [
            _Pool(
                cls=cls,
                size=allocation.size(cls.id),
                slots=np.sort(
                    np.fromiter(allocation.usable_sets[cls.id], dtype=np.int64)
                ),
            )
            for cls in scenario.classes
        ]

    if config.arrival_mode == ArrivalMode.PER_DEVICE_BERNOULLI:
        resolved = []
        for pool in pools:
            cls = pool.cls
            if cls.coordinators is None:
                raise SimulationError(
                    f"class {cls.id}: per-device mode needs population and "
                    f"per_device_rate"
                )
            if cls.per_device_rate > 1.0:
                raise SimulationError(
                    f"class {cls.id}: per-device attempt probability "
                    f"{cls.per_device_rate}/s exceeds 1"
                )
            resolved.append(
                replace(
                    pool, coordinators=cls.coordinators, attempt_prob=cls.per_device_rate
                )
            )
        pools = resolved
    return pools


def _draw_counts(rng: np.random.Generator, pool: _Pool, seconds: int, mode: ArrivalMode) -> np.ndarray:
    if mode == ArrivalMode.POISSON_AGGREGATE:
        return rng.poisson(pool.cls.ra_density, size=seconds)
    return rng.binomial(pool.coordinators, pool.attempt_prob, size=seconds)


def run(
    scenario: Scenario,
    allocation: AllocationPlan | SharingTopology | None,
    config: SimConfig,
) -> SimStats:
    """Simulate the scenario and measure collision statistics.

    Pass an AllocationPlan under full dedication, a SharingTopology under
    partial dedication, and nothing under full sharing. With
    ``config.measure_delay`` set (full dedication only) per-class mean
    inclusive access delays are tracked as well.
    """
    config.validate()
    if config.measure_delay and scenario.strategy != Strategy.FULL_DEDICATION:
        raise SimulationError("delay measurement requires the full dedication strategy")
    pools = _build_pools(scenario, allocation, config)

    n_classes = len(pools)
    iters, horizon = config.iterations, config.horizon
    total_slots = scenario.total_raos
    attempts = np.zeros((n_classes, iters), dtype=np.int64)
    collided = np.zeros((n_classes, iters), dtype=np.int64)
    events = np.zeros(iters, dtype=np.int64)
    delay_sums = np.zeros((n_classes, iters))
    delay_counts = np.zeros((n_classes, iters), dtype=np.int64)
    censored = np.zeros((n_classes, iters), dtype=np.int64)

    seconds_index = np.arange(horizon)
    for it in range(iters):
        rngs = [_stream(config.seed, it, pool.cls.id) for pool in pools]
        slots_by_class = []
        for pool, rng in zip(pools, rngs):
            counts = _draw_counts(rng, pool, horizon, config.arrival_mode)
            u = rng.random(int(counts.sum()))
            local = pool.pick(u)
            secs = np.repeat(seconds_index, counts)
            slots_by_class.append(secs * total_slots + local)
        occupancy = np.bincount(
            np.concatenate(slots_by_class) if slots_by_class else np.array([], dtype=np.int64),
            minlength=horizon * total_slots,
        )
        events[it] = np.count_nonzero(occupancy >= 2)
        for pos, slots in enumerate(slots_by_class):
            attempts[pos, it] = slots.size
            collided[pos, it] = int((occupancy[slots] >= 2).sum())

        if config.measure_delay:
            occ2d = occupancy.reshape(horizon, total_slots)
            for pos, (pool, rng) in enumerate(zip(pools, rngs)):
                d_sum, d_n, d_cens = _measure_delays(
                    pool, rng, slots_by_class[pos], occ2d, total_slots, config
                )
                delay_sums[pos, it] = d_sum
                delay_counts[pos, it] = d_n
                censored[pos, it] = d_cens

    per_class: dict[int, ClassStats] = {}
    for pos, pool in enumerate(pools):
        att, col = attempts[pos], collided[pos]
        with_attempts = att > 0
        rates = col[with_attempts] / att[with_attempts]
        _, rate_stderr = _mean_stderr(rates)
        density, density_stderr = _mean_stderr(col / horizon)
        mean_delay = delay_stderr = None
        if config.measure_delay:
            n_delays = int(delay_counts[pos].sum())
            mean_delay = float(delay_sums[pos].sum() / n_delays) if n_delays else None
            has = delay_counts[pos] > 0
            _, delay_stderr = _mean_stderr(delay_sums[pos][has] / delay_counts[pos][has])
        per_class[pool.cls.id] = ClassStats(
            attempts=int(att.sum()),
            collided=int(col.sum()),
            collision_rate=float(col.sum() / att.sum()) if att.sum() else 0.0,
            rate_stderr=rate_stderr,
            collision_density=density,
            density_stderr=density_stderr,
            mean_delay=mean_delay,
            delay_stderr=delay_stderr,
            censored=int(censored[pos].sum()),
        )

    total_density = sum(stats.collision_density for stats in per_class.values())
    _, total_stderr = _mean_stderr(collided.sum(axis=0) / horizon)
    event_density, event_stderr = _mean_stderr(events / horizon)
    return SimStats(
        per_class=per_class,
        total_density=total_density,
        total_density_stderr=total_stderr,
        event_density=event_density,
        event_density_stderr=event_stderr,
        iterations=iters,
        horizon=horizon,
        seed=config.seed,
    )


def _measure_delays(
    pool: _Pool,
    rng: np.random.Generator,
    slots_global: np.ndarray,
    occ2d: np.ndarray,
    total_slots: int,
    config: SimConfig,
) -> tuple[float, int, int]:
    """Track retries for one class in one iteration.

    Returns (sum of inclusive delays, successes, censored requests). The
    inclusive delay of a request succeeding on attempt k is k backoff
    periods. Retries extend past the horizon against lazily drawn background
    seconds; a retry probing the second of its own first attempt discounts
    its own occupancy contribution.
    """
    backoff = pool.cls.backoff
    horizon = occ2d.shape[0]
    # background seconds reachable by the final allowed attempt
    n_ext = math.ceil(config.max_attempts * backoff) + 1
    ext_counts = _draw_counts(rng, pool, n_ext, config.arrival_mode)
    ext_u = rng.random(int(ext_counts.sum()))
    ext_local = np.minimum((ext_u * pool.size).astype(np.int64), pool.size - 1)
    ext_secs = np.repeat(np.arange(n_ext), ext_counts)
    ext_occ = np.bincount(
        ext_secs * pool.size + ext_local, minlength=n_ext * pool.size
    ).reshape(n_ext, pool.size)
    pool_occ = np.concatenate([occ2d[:, pool.offset : pool.offset + pool.size], ext_occ])

    first_second = slots_global // total_slots
    first_local = slots_global % total_slots - pool.offset
    collided = occ2d.reshape(-1)[slots_global] >= 2

    successes = int((~collided).sum())
    delay_sum = successes * backoff  # attempt 1 counts one backoff period
    s0 = first_second[collided]
    j0 = first_local[collided]
    t0 = s0 + (j0 + 0.5) / pool.size
    for attempt in range(2, config.max_attempts + 1):
        if s0.size == 0:
            break
        sec = np.floor(t0 + (attempt - 1) * backoff).astype(np.int64)
        u = rng.random(s0.size)
        j = np.minimum((u * pool.size).astype(np.int64), pool.size - 1)
        others = pool_occ[sec, j] - ((sec == s0) & (j == j0))
        ok = others < 1
        n_ok = int(ok.sum())
        successes += n_ok
        delay_sum += n_ok * attempt * backoff
        s0, j0, t0 = s0[~ok], j0[~ok], t0[~ok]
    return float(delay_sum), successes, int(s0.size)


def run_delay(scenario: Scenario, plan: AllocationPlan, config: SimConfig) -> SimStats:
    """Collision plus access-delay measurement under full dedication."""
    if not config.measure_delay:
        raise SimulationError("run_delay requires config.measure_delay")
    return run(scenario, plan, config)


def sweep_dedication(
    scenario: Scenario,
    class_index: int,
    l_values: Sequence[int],
    config: SimConfig,
) -> SweepResult:
    """Simulate a two-class scenario across dedication splits.

    ``l_values`` are RAO counts for the swept class (the other class gets
    the remainder); each point carries its simulated stats next to the
    closed-form densities, and the split with the lowest simulated total
    density is reported as the empirical optimum.
    """
    if len(scenario.classes) != 2:
        raise SimulationError("dedication sweep supports exactly 2 device classes")
    if scenario.strategy != Strategy.FULL_DEDICATION:
        raise SimulationError("dedication sweep requires the full dedication strategy")
    if class_index not in (0, 1):
        raise SimulationError("class_index must be 0 or 1")
    swept = scenario.classes[class_index]
    other = scenario.classes[1 - class_index]
    total = scenario.total_raos
    points = []
    for value in l_values:
        if not 1 <= value <= total - 1:
            raise SimulationError(
                f"swept value {value} outside [1, {total - 1}]"
            )
        plan = AllocationPlan({swept.id: value, other.id: total - value})
        stats = run(scenario, plan, config)
        analytic = {
            cls.id: cls.ra_density
            * analytics.simple_collision_rate(cls.ra_density, plan.get(cls.id))
            for cls in scenario.classes
        }
        points.append(
            SweepPoint(
                l_value=value,
                plan=plan,
                stats=stats,
                analytic_density=analytic,
                analytic_total=math.fsum(analytic.values()),
            )
        )
    best = min(points, key=lambda p: p.stats.total_density)
    return SweepResult(
        class_id=swept.id, points=tuple(points), empirical_optimum=best.l_value
    )
