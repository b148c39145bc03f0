import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayplan.core_model import Item, Pog, WeightVector, build_objective_vector
from bayplan.errors import InstanceTooLarge, InvalidInput
from bayplan.pog_knapsack import (
    GreedyMode,
    KnapsackInstance,
    solve_brute_force,
    solve_curve,
    solve_dp,
    solve_greedy,
)
from bayplan.synthetic import random_knapsack_instance, random_pog


def sales_pog(widths, values, capacity, pog_id="p"):
    items = tuple(Item(f"i{k}", w, float(v), 0.0, 1.0) for k, (w, v) in enumerate(zip(widths, values)))
    return Pog(pog_id, items, capacity)


@pytest.mark.parametrize(
    "weights, values, capacity, value, selected",
    [
        ((2, 3, 4), (3, 4, 5), 5, 7.0, (1, 1, 0)),
        ((2, 3, 4), (3, 4, 5), 0, 0.0, (0, 0, 0)),
        ((5,), (10,), 4, 0.0, (0,)),
        ((1, 1, 1), (-1, 2, 2), 3, 4.0, (0, 1, 1)),
    ],
)
def test_solve_dp_examples(weights, values, capacity, value, selected):
    solution = solve_dp(KnapsackInstance(weights, values, capacity))
    assert solution.value == value
    assert solution.selected == selected
    assert solution.used <= capacity


def test_solve_dp_prefers_least_space_then_smallest_bits():
    # {0} and {1, 2} both reach 6; {0} uses 3 units, {1, 2} uses 2
    assert solve_dp(KnapsackInstance((3, 1, 1), (6, 3, 3), 3)).selected == (0, 1, 1)
    # equal value and space: the lexicographically smallest vector wins
    assert solve_dp(KnapsackInstance((2, 2), (5, 5), 2)).selected == (0, 1)
    assert solve_brute_force(KnapsackInstance((2, 2), (5, 5), 2)).selected == (0, 1)


def test_zero_value_items_are_left_out():
    solution = solve_dp(KnapsackInstance((1, 1), (0, 4), 2))
    assert solution.selected == (0, 1)
    assert solution.used == 1


def test_instance_validation():
    with pytest.raises(InvalidInput):
        KnapsackInstance((0, 1), (1, 1), 3)
    with pytest.raises(InvalidInput):
        KnapsackInstance((1,), (1, 2), 3)
    with pytest.raises(InvalidInput):
        KnapsackInstance((1,), (1,), -1)


def test_table_size_guard_names_the_remedy():
    with pytest.raises(InstanceTooLarge, match="coarser SpaceUnit"):
        solve_dp(KnapsackInstance((1,) * 1001, (1.0,) * 1001, 10**6))


def test_brute_force_examples_and_guard():
    assert solve_brute_force(KnapsackInstance((2, 3, 4), (3, 4, 5), 5)).value == 7.0
    assert solve_brute_force(KnapsackInstance((2, 3, 4), (3, 4, 5), 0)).value == 0.0
    single = solve_brute_force(KnapsackInstance((1,), (9,), 1))
    assert (single.value, single.selected) == (9.0, (1,))
    with pytest.raises(InstanceTooLarge):
        solve_brute_force(KnapsackInstance((1,) * 26, (1.0,) * 26, 5))


@pytest.mark.parametrize(
    "weights, values, capacity, mode, value",
    [
        ((2, 3, 4), (3, 4, 5), 5, GreedyMode.BY_PRODUCTIVITY, 7.0),
        ((3, 3), (5, 5), 3, GreedyMode.BY_VALUE, 5.0),
        ((3, 3), (5, 5), 3, GreedyMode.BY_PRODUCTIVITY, 5.0),
        ((1, 4), (2, 9), 4, GreedyMode.BY_VALUE, 9.0),
        ((1, 4), (2, 9), 4, GreedyMode.BY_PRODUCTIVITY, 9.0),
    ],
)
def test_greedy_examples(weights, values, capacity, mode, value):
    assert solve_greedy(KnapsackInstance(weights, values, capacity), mode).value == value


def test_greedy_keeps_scanning_after_an_item_does_not_fit():
    solution = solve_greedy(KnapsackInstance((4, 2, 1), (8, 3, 1), 5), GreedyMode.BY_VALUE)
    assert solution.selected == (1, 0, 1)
    assert solution.used == 5


def test_oracle_equivalence(rng):
    for _ in range(1000):
        instance = random_knapsack_instance(rng)
        dp, brute = solve_dp(instance), solve_brute_force(instance)
        assert dp.value == brute.value
        assert dp.selected == brute.selected
        assert dp.used <= instance.capacity
        recomputed = sum(v for v, bit in zip(instance.values, dp.selected) if bit)
        assert recomputed == pytest.approx(dp.value, rel=1e-9, abs=1e-9)
        for mode in GreedyMode:
            assert solve_greedy(instance, mode).value <= dp.value


@pytest.mark.property_based
@given(
    st.lists(st.tuples(st.integers(1, 10), st.integers(-5, 20)), max_size=10),
    st.integers(0, 40),
)
@settings(max_examples=200, deadline=None)
def test_dp_matches_brute_force_property(items, capacity):
    instance = KnapsackInstance(tuple(w for w, _ in items), tuple(v for _, v in items), capacity)
    assert solve_dp(instance) == solve_brute_force(instance)


@pytest.mark.parametrize(
    "widths, values, capacity, curve",
    [
        ((2, 3), (3, 4), 5, (0, 0, 3, 4, 4, 7)),
        ((2,), (5,), 3, (0, 0, 5, 5)),
        ((), (), 3, (0, 0, 0, 0)),
    ],
)
def test_solve_curve_examples(widths, values, capacity, curve):
    result = solve_curve(sales_pog(widths, values, capacity), WeightVector(sales=1))
    assert tuple(result.values) == curve
    assert result.c_max == capacity


def test_curve_arrays_are_read_only():
    curve = solve_curve(sales_pog((2, 3), (3, 4), 5), WeightVector(sales=1))
    with pytest.raises(ValueError):
        curve.values[0] = 1.0


def test_curve_lookup_out_of_range():
    curve = solve_curve(sales_pog((2,), (5,), 3), WeightVector(sales=1))
    assert curve.assortment_at(2).bits == (1,)
    with pytest.raises(InvalidInput):
        curve.value_at(4)


def test_capacity_sweep_matches_independent_solves(rng):
    weights = WeightVector(sales=1, margin=0.5, units=0.1, similarity=0.25)
    for k in range(100):
        pog = random_pog(rng, max_items=12, max_capacity=30, pog_id=f"p{k}")
        curve = solve_curve(pog, weights)
        objective = build_objective_vector(pog.items, weights)
        assert np.all(np.diff(curve.values) >= 0)
        for capacity in range(curve.c_max + 1):
            independent = solve_dp(KnapsackInstance(tuple(i.space for i in pog.items), tuple(objective), capacity))
            assortment = curve.assortment_at(capacity)
            assert assortment.value == independent.value
            assert assortment.bits == independent.selected
            assert assortment.used == independent.used


def test_large_similarity_weight_recovers_baseline(rng):
    for k in range(50):
        pog = random_pog(rng, pog_id=f"p{k}")
        performance = sum(abs((item.price + item.margin) * item.demand) for item in pog.items)
        curve = solve_curve(pog, WeightVector(sales=1, margin=1, similarity=performance + 1))
        baseline = tuple(int(item.in_baseline) for item in pog.items)
        assert curve.assortment_at(pog.capacity).bits == baseline


def test_deterministic_across_runs(rng):
    pog = random_pog(rng, max_items=12, max_capacity=30)
    first = solve_curve(pog, WeightVector(sales=1, margin=1))
    second = solve_curve(pog, WeightVector(sales=1, margin=1))
    assert np.array_equal(first.values, second.values)
    assert np.array_equal(first.assortments, second.assortments)


def _best_time(instance, repeats=3):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        solve_dp(instance)
        times.append(time.perf_counter() - start)
    return min(times)


@pytest.mark.slow
def test_dp_time_scales_linearly_in_capacity():
    rng = np.random.default_rng(7)
    weights = tuple(int(w) for w in rng.integers(1, 200, size=200))
    values = tuple(float(v) for v in rng.integers(1, 1000, size=200))
    timings = [_best_time(KnapsackInstance(weights, values, c)) for c in (10_000, 20_000, 40_000)]
    assert timings[1] <= 2.5 * timings[0]
    assert timings[2] <= 2.5 * timings[1]
