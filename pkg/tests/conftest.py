"""Shared scenario builders for the test suite."""

from __future__ import annotations

from rachopt.model import (
    DeviceClass,
    QosKind,
    QosTarget,
    Scenario,
    Strategy,
    validate_scenario,
)

# reference device-class populations used across the experiment suite:
# (population, attempts per device per second, aggregate RA density in Hz)
CLASS_SPECS = {
    1: (3000, 1 / 60, 50.0),
    2: (30000, 1 / 300, 100.0),
    3: (30000, 1 / 60, 500.0),
    4: (30000, 1 / 30, 1000.0),
}

RATE_QOS = QosTarget(kind=QosKind.MAX_COLLISION_RATE, max_collision_rate=0.02)


def make_class(
    cid: int,
    *,
    special: bool = False,
    qos: QosTarget | None = None,
    backoff: float = 1.0,
    with_population: bool = True,
) -> DeviceClass:
    population, rate, density = CLASS_SPECS[cid]
    return DeviceClass(
        id=cid,
        ra_density=density,
        population=population if with_population else None,
        per_device_rate=rate if with_population else None,
        backoff=backoff,
        qos=qos,
        special=special,
    )


def make_scenario(
    ids: tuple[int, ...],
    strategy: Strategy = Strategy.FULL_DEDICATION,
    total_raos: int = 10800,
    special_ids: tuple[int, ...] = (),
    qos_for: dict[int, QosTarget] | None = None,
    with_population: bool = True,
) -> Scenario:
    qos_for = qos_for or {}
    classes = tuple(
        make_class(
            cid,
            special=cid in special_ids,
            qos=qos_for.get(cid),
            with_population=with_population,
        )
        for cid in ids
    )
    return validate_scenario(
        Scenario(classes=classes, total_raos=total_raos, strategy=strategy)
    )
