import math
from fractions import Fraction

import numpy as np
import pytest

from bayplan.core_model import Item, Pog, WeightVector
from bayplan.curves import (
    BayValueFunction,
    CurveKind,
    as_bays,
    bays_to_capacity,
    check_concavity,
    concave_majorant,
    curve_from_pog,
    feasible_grid,
    fit_log,
)
from bayplan.errors import DiminishingReturnsViolation, InvalidInput
from bayplan.pog_knapsack import solve_curve


@pytest.fixture
def example_curve():
    # values by capacity 0..5: (0, 0, 3, 4, 4, 7)
    items = (Item("a", 2, 3.0, 0.0, 1.0), Item("b", 3, 4.0, 0.0, 1.0))
    return solve_curve(Pog("p", items, 5), WeightVector(sales=1))


@pytest.mark.parametrize(
    "value, expected",
    [(0.5, Fraction(1, 2)), ("1/2", Fraction(1, 2)), ("0.1", Fraction(1, 10)), (0.1, Fraction(1, 10)), (3, Fraction(3))],
)
def test_as_bays(value, expected):
    assert as_bays(value) == expected


@pytest.mark.parametrize("value", ["half", float("inf"), True])
def test_as_bays_rejects(value):
    with pytest.raises(InvalidInput):
        as_bays(value)


def test_feasible_grid():
    assert feasible_grid(1, 2, "1/2") == (1, Fraction(3, 2), 2)
    assert feasible_grid(3, 3, 1) == (3,)
    with pytest.raises(InvalidInput):
        feasible_grid(0, 1, Fraction(2, 3))
    with pytest.raises(InvalidInput):
        feasible_grid(4, 2, 1)


def test_bays_to_capacity_rounds_ties_down():
    assert bays_to_capacity(Fraction(3, 2), 2) == 3
    assert bays_to_capacity(Fraction(1, 2), 1) == 0
    assert bays_to_capacity(Fraction(3, 4), 1) == 1
    assert bays_to_capacity(Fraction(1, 3), 2) == 1


def test_curve_from_pog(example_curve):
    f = curve_from_pog(example_curve, 1, 2, 5, 1)
    assert [f(y) for y in (2, 3, 4, 5)] == [3.0, 4.0, 4.0, 7.0]
    single = curve_from_pog(example_curve, 1, 3, 3, 1)
    assert single.grid == (3,)
    assert single(3) == 4.0


def test_curve_from_pog_half_bays_with_two_units_per_bay(example_curve):
    f = curve_from_pog(example_curve, 2, 1, Fraction(5, 2), Fraction(1, 2))
    assert f(Fraction(3, 2)) == example_curve.value_at(3)


def test_curve_from_pog_rejects_short_curve(example_curve):
    with pytest.raises(InvalidInput):
        curve_from_pog(example_curve, 2, 1, 3, 1)


def test_curve_from_pog_is_monotone(rng):
    from bayplan.synthetic import random_pog

    for k in range(20):
        pog = random_pog(rng, max_items=8, max_capacity=12, pog_id=f"p{k}")
        f = curve_from_pog(solve_curve(pog, WeightVector(sales=1, margin=1)), 1, 0, pog.capacity, 1)
        values = [f(y) for y in f.grid]
        assert values == sorted(values)


def test_fit_log_recovers_exact_model():
    points = [(y, 2 + 3 * math.log(y)) for y in (1, 2, 4, 8)]
    f = fit_log(points)
    assert f.kind is CurveKind.LOGARITHMIC
    assert f.a == pytest.approx(2, abs=1e-9)
    assert f.b == pytest.approx(3, abs=1e-9)


def test_fit_log_flat_data():
    f = fit_log([(1, 5), (math.e, 5)])
    assert f.a == pytest.approx(5, abs=1e-12)
    assert f.b == pytest.approx(0, abs=1e-12)


def test_fit_log_matches_normal_equations():
    points = [(1, 0), (2, 1), (4, 2), (8, 2.5)]
    f = fit_log(points)
    x = np.log([p[0] for p in points])
    design = np.column_stack([np.ones_like(x), x])
    values = np.array([p[1] for p in points])
    (a, b), *_ = np.linalg.lstsq(design, values, rcond=None)
    assert f.b > 0
    assert (f.a, f.b) == pytest.approx((a, b), abs=1e-9)
    residuals = values - (f.a + f.b * x)
    assert residuals @ design == pytest.approx([0, 0], abs=1e-9)


def test_fit_log_errors():
    with pytest.raises(InvalidInput):
        fit_log([(2, 1), (2, 3)])
    with pytest.raises(InvalidInput):
        fit_log([(0, 1), (2, 3)])
    with pytest.raises(DiminishingReturnsViolation) as caught:
        fit_log([(1, 10), (2, 5), (4, 0)])
    assert caught.value.b < 0


def test_logarithmic_function():
    f = BayValueFunction.logarithmic(1.0, 2.0)
    assert f(1) == 1.0
    assert f(math.e) == pytest.approx(3.0)
    with pytest.raises(InvalidInput):
        f(0)
    with pytest.raises(DiminishingReturnsViolation):
        BayValueFunction.logarithmic(1.0, -0.5)


def test_tabulated_interpolation_and_range():
    f = BayValueFunction.tabulated({1: 2.0, 3: 6.0})
    assert f(2) == 4.0
    assert f.has_point(3) and not f.has_point(2)
    with pytest.raises(InvalidInput):
        f(4)
    with pytest.raises(InvalidInput):
        BayValueFunction.tabulated([(1, 2.0), ("1", 3.0)])


def test_check_concavity():
    assert check_concavity(BayValueFunction.logarithmic(0, 1), [1, 2, 3, 4]) == []
    violations = check_concavity(BayValueFunction.tabulated({0: 0, 1: 1, 2: 3}), [0, 1, 2])
    assert [v.middle for v in violations] == [1]
    assert violations[0].shortfall == pytest.approx(0.5)


def test_knapsack_curves_need_not_be_concave(example_curve):
    f = curve_from_pog(example_curve, 1, 2, 5, 1)
    violations = check_concavity(f, f.grid)
    assert [v.middle for v in violations] == [4]


def test_concave_majorant(example_curve):
    f = curve_from_pog(example_curve, 1, 2, 5, 1)
    repaired = concave_majorant(f, f.grid)
    assert check_concavity(repaired, repaired.grid) == []
    assert [repaired(y) for y in repaired.grid] == pytest.approx([3.0, 13 / 3, 17 / 3, 7.0])
    assert all(repaired(y) >= f(y) for y in f.grid)
