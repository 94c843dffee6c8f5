import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rachopt.analytics import (
    any_collision_probability,
    cell_collision_density,
    cell_collision_probability,
    class_metrics,
    full_dedication_rates,
    full_sharing_rate,
    mean_access_delay,
    partial_dedication_rates,
    simple_collision_rate,
)
from rachopt.model import AllocationPlan, SharingTopology, Strategy

from conftest import make_scenario

densities = st.floats(1e-3, 1e5)
pools = st.floats(1.0, 1e7)


class TestSimpleCollisionRate:
    def test_reference_values(self):
        # frozen from direct double-precision evaluation of 1 - exp(-g/L)
        assert simple_collision_rate(50, 3600) == pytest.approx(
            0.013792883256083781, rel=1e-14
        )
        assert simple_collision_rate(10800, 10800) == pytest.approx(
            0.6321205588285577, rel=1e-14
        )

    def test_vanishing_load_limit(self):
        p = simple_collision_rate(1e-9, 1e9)
        assert 0 < p < 1e-15

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            simple_collision_rate(50, 0)
        with pytest.raises(ValueError):
            simple_collision_rate(0, 3600)

    @given(gamma=densities, raos=pools)
    def test_stays_in_open_unit_interval(self, gamma, raos):
        # beyond ~37 requests per slot the rate saturates to 1.0 in doubles
        assume(gamma / raos < 30)
        assert 0 < simple_collision_rate(gamma, raos) < 1

    @given(g1=densities, g2=densities, raos=pools)
    def test_strictly_increasing_in_density(self, g1, g2, raos):
        assume(abs(g1 - g2) / max(g1, g2) > 1e-9)
        assume(max(g1, g2) / raos < 30)
        lo, hi = sorted((g1, g2))
        assert simple_collision_rate(lo, raos) < simple_collision_rate(hi, raos)

    @given(gamma=densities, r1=pools, r2=pools)
    def test_strictly_decreasing_in_raos(self, gamma, r1, r2):
        assume(abs(r1 - r2) / max(r1, r2) > 1e-9)
        assume(gamma / min(r1, r2) < 30)
        lo, hi = sorted((r1, r2))
        assert simple_collision_rate(gamma, hi) < simple_collision_rate(gamma, lo)


class TestFullSharing:
    def test_equals_single_pool_rate_exactly(self):
        scenario = make_scenario((1, 2), strategy=Strategy.FULL_SHARING)
        assert full_sharing_rate(scenario) == simple_collision_rate(
            scenario.total_density, scenario.total_raos
        )

    def test_reference_pairs(self):
        s12 = make_scenario((1, 2), strategy=Strategy.FULL_SHARING)
        assert full_sharing_rate(s12) == pytest.approx(0.013792883256083781, rel=1e-14)
        s14 = make_scenario((1, 4), strategy=Strategy.FULL_SHARING)
        assert full_sharing_rate(s14) == pytest.approx(0.09264565057207096, rel=1e-14)

    def test_single_class_matches_simple_rate(self):
        scenario = make_scenario((3,), strategy=Strategy.FULL_SHARING)
        assert full_sharing_rate(scenario) == simple_collision_rate(500.0, 10800)


class TestFullDedication:
    def test_reference_rates(self):
        scenario = make_scenario((1, 2))
        metrics = full_dedication_rates(scenario, AllocationPlan({1: 3600, 2: 7200}))
        assert metrics[1].collision_rate == pytest.approx(0.013792883256083781, rel=1e-14)
        assert metrics[1].collision_density == pytest.approx(
            50 * 0.013792883256083781, rel=1e-13
        )

    def test_reservation_operating_point(self):
        # ties the 2% QoS reservation example to its predicted rate
        assert simple_collision_rate(50, 2475) == pytest.approx(
            0.019999326626579397, rel=1e-14
        )
        assert simple_collision_rate(50, 2475) <= 0.02

    def test_huge_pool_limit(self):
        assert simple_collision_rate(50, 1e15) < 1e-10

    def test_missing_class_in_plan(self):
        scenario = make_scenario((1, 2))
        with pytest.raises(KeyError, match="class 2"):
            full_dedication_rates(scenario, AllocationPlan({1: 10800}))

    @given(gamma_other=st.floats(1.0, 1e5))
    @settings(max_examples=30)
    def test_classes_fully_decoupled(self, gamma_other):
        from rachopt.model import DeviceClass, Scenario, validate_scenario

        plan = AllocationPlan({1: 3600, 9: 7200})
        base = make_scenario((1,)).classes[0]

        def with_other(g):
            other = DeviceClass(id=9, ra_density=g)
            return validate_scenario(
                Scenario(
                    classes=(base, other),
                    total_raos=10800,
                    strategy=Strategy.FULL_DEDICATION,
                )
            )

        reference = full_dedication_rates(with_other(123.0), plan)[1]
        perturbed = full_dedication_rates(with_other(gamma_other), plan)[1]
        assert perturbed == reference


class TestPartialDedication:
    def test_disjoint_sets_reduce_to_dedication(self):
        scenario = make_scenario((1, 2), strategy=Strategy.PARTIAL_DEDICATION)
        plan = AllocationPlan({1: 3600, 2: 7200})
        topo = SharingTopology.from_plan(scenario, plan)
        rates = partial_dedication_rates(scenario, topo)
        assert rates[1] == pytest.approx(simple_collision_rate(50, 3600), abs=1e-12)
        assert rates[2] == pytest.approx(simple_collision_rate(100, 7200), abs=1e-12)

    def test_fully_shared_sets_reduce_to_sharing(self):
        scenario = make_scenario((1, 2), strategy=Strategy.PARTIAL_DEDICATION)
        topo = SharingTopology.fully_shared(scenario)
        rates = partial_dedication_rates(scenario, topo)
        expected = full_sharing_rate(scenario)
        assert rates[1] == pytest.approx(expected, abs=1e-12)
        assert rates[2] == pytest.approx(expected, abs=1e-12)

    def test_three_region_overlap_against_scalar_oracle(self):
        # class 1 may use [0, 5400), class 2 may use [2700, 10800)
        scenario = make_scenario((1, 2), strategy=Strategy.PARTIAL_DEDICATION)
        topo = SharingTopology.from_ranges({1: [(0, 5399)], 2: [(2700, 10799)]})
        rates = partial_dedication_rates(scenario, topo)

        # independent scalar evaluation: walk every RAO, accumulate its load
        gammas = {1: 50.0, 2: 100.0}
        sizes = {cid: topo.size(cid) for cid in gammas}
        per_class_terms = {1: [], 2: []}
        for slot in range(10800):
            sharers = [cid for cid in gammas if slot in topo.usable_sets[cid]]
            if not sharers:
                continue
            load = math.fsum(gammas[cid] / sizes[cid] for cid in sharers)
            for cid in sharers:
                per_class_terms[cid].append(-math.expm1(-load))
        for cid in gammas:
            oracle = math.fsum(per_class_terms[cid]) / sizes[cid]
            assert rates[cid] == pytest.approx(oracle, abs=1e-12)

        # frozen values from the oracle above
        assert rates[1] == pytest.approx(0.015294873819897137, rel=1e-12)
        assert rates[2] == pytest.approx(0.01530426361688709, rel=1e-12)

    def test_empty_usable_set_rejected(self):
        scenario = make_scenario((1, 2), strategy=Strategy.PARTIAL_DEDICATION)
        topo = SharingTopology({1: frozenset(range(10800)), 2: frozenset()})
        with pytest.raises(Exception, match="empty"):
            partial_dedication_rates(scenario, topo)

    @given(sizes=st.lists(st.integers(5, 400), min_size=1, max_size=4))
    @settings(max_examples=30)
    def test_random_disjoint_partitions_match_dedication(self, sizes):
        from rachopt.model import DeviceClass, Scenario, validate_scenario

        classes = tuple(
            DeviceClass(id=i, ra_density=float(3 * (i + 1))) for i in range(len(sizes))
        )
        scenario = validate_scenario(
            Scenario(
                classes=classes,
                total_raos=sum(sizes),
                strategy=Strategy.PARTIAL_DEDICATION,
            )
        )
        plan = AllocationPlan(dict(zip(scenario.class_ids, sizes)))
        topo = SharingTopology.from_plan(scenario, plan)
        rates = partial_dedication_rates(scenario, topo)
        for cls in scenario.classes:
            expected = simple_collision_rate(cls.ra_density, plan.get(cls.id))
            assert rates[cls.id] == pytest.approx(expected, abs=1e-12)


class TestCellMetrics:
    def test_density_reference_values(self):
        s12 = make_scenario((1, 2))
        assert cell_collision_density(s12, AllocationPlan({1: 3600, 2: 7200})) == pytest.approx(
            2.068932488412567, rel=1e-13
        )
        s14 = make_scenario((1, 4))
        assert cell_collision_density(s14, AllocationPlan({1: 514, 4: 10286})) == pytest.approx(
            97.27793446128173, rel=1e-13
        )

    def test_density_vanishes_for_huge_pool(self):
        from rachopt.model import DeviceClass, Scenario, validate_scenario

        scenario = validate_scenario(
            Scenario(
                classes=(DeviceClass(id=1, ra_density=1.0),),
                total_raos=10**9,
                strategy=Strategy.FULL_DEDICATION,
            )
        )
        assert cell_collision_density(scenario, AllocationPlan({1: 10**9})) < 1e-8

    def test_probability_reference_value(self):
        s12 = make_scenario((1, 2))
        assert cell_collision_probability(
            s12, AllocationPlan({1: 3600, 2: 7200})
        ) == pytest.approx(0.875485528555877, rel=1e-13)

    def test_single_request_probability_equals_rate(self):
        from rachopt.model import DeviceClass, Scenario, validate_scenario

        scenario = validate_scenario(
            Scenario(
                classes=(DeviceClass(id=1, ra_density=1.0),),
                total_raos=100,
                strategy=Strategy.FULL_DEDICATION,
            )
        )
        plan = AllocationPlan({1: 100})
        assert cell_collision_probability(scenario, plan) == pytest.approx(
            simple_collision_rate(1.0, 100), rel=1e-12
        )

    def test_probability_vanishes_with_rates(self):
        s12 = make_scenario((1, 2))
        assert cell_collision_probability(
            s12, AllocationPlan({1: 10**10, 2: 10**10})
        ) < 1e-5

    @given(
        gammas=st.lists(st.floats(1.0, 2000.0), min_size=1, max_size=5),
        shares=st.lists(st.integers(10, 10**5), min_size=5, max_size=5),
    )
    @settings(max_examples=100)
    def test_product_and_exponential_forms_agree(self, gammas, shares):
        from rachopt.model import DeviceClass, Scenario, validate_scenario

        classes = tuple(DeviceClass(id=i, ra_density=g) for i, g in enumerate(gammas))
        scenario = validate_scenario(
            Scenario(
                classes=classes,
                total_raos=sum(shares[: len(gammas)]),
                strategy=Strategy.FULL_DEDICATION,
            )
        )
        plan = AllocationPlan(dict(zip(scenario.class_ids, shares)))
        via_product = cell_collision_probability(scenario, plan)
        via_exponent = -math.expm1(
            -math.fsum(g * g / l for g, l in zip(gammas, shares))
        )
        assert via_product == pytest.approx(via_exponent, rel=1e-12, abs=1e-12)


class TestAccessDelay:
    def test_reference_value(self):
        delay = mean_access_delay(50, 3600, 1.0)
        assert delay.inclusive == pytest.approx(1.0139857875915788, rel=1e-14)

    def test_no_retry_limit(self):
        delay = mean_access_delay(1e-6, 1e9, 2.5)
        assert delay.inclusive == pytest.approx(2.5, rel=1e-12)
        assert delay.exclusive == pytest.approx(0.0, abs=1e-12)

    @given(
        gamma=densities,
        raos=pools,
        backoff=st.floats(1e-3, 1e3),
    )
    def test_difference_is_exactly_one_backoff(self, gamma, raos, backoff):
        assume(gamma / raos < 5.0)
        delay = mean_access_delay(gamma, raos, backoff)
        assert delay.inclusive - delay.exclusive == pytest.approx(backoff, rel=1e-12)

    @given(gamma=densities, raos=pools, backoff=st.floats(1e-3, 1e3))
    def test_inclusive_matches_retry_series_sum(self, gamma, raos, backoff):
        assume(gamma / raos < 30.0)
        p = simple_collision_rate(gamma, raos)
        delay = mean_access_delay(gamma, raos, backoff)
        assert delay.inclusive == pytest.approx(backoff / (1.0 - p), rel=1e-12)

    def test_rejects_degenerate_inputs(self):
        for args in [(0, 10, 1), (10, 0, 1), (10, 10, 0)]:
            with pytest.raises(ValueError):
                mean_access_delay(*args)


class TestClassMetrics:
    @given(gamma=densities, raos=pools, backoff=st.floats(1e-3, 1e3))
    def test_rates_sum_to_one_exactly(self, gamma, raos, backoff):
        m = class_metrics(gamma, raos, backoff)
        assert m.collision_rate + m.success_rate == 1.0
        assert m.collision_density == gamma * m.collision_rate

    def test_any_collision_probability_empty_is_zero(self):
        assert any_collision_probability([]) == 0.0
