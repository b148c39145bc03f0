"""
Seeded random instances for tests, benchmarks and the `generate` command.

Values are integers so that solvers that agree on the optimum agree on it exactly.
"""
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .bay_alloc import BayProblem, PogSpec
from .core_model import Item, Pog, SpaceUnit
from .curves import BayValueFunction, feasible_grid
from .pog_knapsack import KnapsackInstance

HALF_BAY: Fraction = Fraction(1, 2)


def random_knapsack_instance(
    rng: np.random.Generator,
    max_items: int = 15,
    max_weight: int = 10,
    value_range: Sequence[int] = (-5, 20),
    max_capacity: int = 40,
) -> KnapsackInstance:
    """
    Draw 0..max_items items with weights 1..max_weight, integer values in value_range
    (inclusive) and a capacity in 0..max_capacity.
    """
    n = int(rng.integers(0, max_items + 1))
    weights = rng.integers(1, max_weight + 1, size=n)
    values = rng.integers(value_range[0], value_range[1] + 1, size=n)
    capacity = int(rng.integers(0, max_capacity + 1))
    return KnapsackInstance(tuple(int(w) for w in weights), tuple(float(v) for v in values), capacity)


def random_pog(
    rng: np.random.Generator,
    max_items: int = 12,
    max_capacity: int = 30,
    pog_id: str = "pog",
    unit: Optional[SpaceUnit] = None,
) -> Pog:
    """
    A POG with 1..max_items items whose baseline assortment fits the capacity.

    Prices, demands and margins are small integers (margins may be negative); the baseline
    is a random subset trimmed until it fits.
    """
    n = int(rng.integers(1, max_items + 1))
    capacity = int(rng.integers(1, max_capacity + 1))
    spaces = rng.integers(1, max(2, capacity // 2) + 1, size=n)
    chosen = rng.random(n) < 0.5
    used = 0
    for i in range(n):
        if chosen[i] and used + spaces[i] <= capacity:
            used += int(spaces[i])
        else:
            chosen[i] = False

    items = tuple(
        Item(
            id=f"{pog_id}-{i:03d}",
            space=int(spaces[i]),
            price=float(rng.integers(0, 11)),
            margin=float(rng.integers(-3, 6)),
            demand=float(rng.integers(0, 11)),
            in_baseline=bool(chosen[i]),
        )
        for i in range(n)
    )
    return Pog(pog_id, items, capacity, unit or SpaceUnit(1.0))


def _concave_values(rng: np.random.Generator, count: int) -> np.ndarray:
    start = int(rng.integers(0, 21))
    increments = np.sort(rng.integers(0, 11, size=count - 1))[::-1]
    return start + np.concatenate(([0], np.cumsum(increments)))


def random_bay_problem(
    rng: np.random.Generator,
    max_pogs: int = 4,
    max_choices: int = 12,
    concave: bool = False,
) -> BayProblem:
    """
    A feasible bay problem with 1..max_pogs POGs and 1..max_choices grid points each.

    Multiples are whole or half bays and values are tabulated integers. With `concave`
    the increments along each grid are non-increasing. The budget lies between the sum of
    the minima and the sum of the maxima plus one bay.
    """
    count = int(rng.integers(1, max_pogs + 1))
    specs = []
    for p in range(count):
        multiple = HALF_BAY if rng.random() < 0.3 else Fraction(1)
        min_alloc = multiple * int(rng.integers(0, 5))
        choices = int(rng.integers(1, max_choices + 1))
        max_alloc = min_alloc + multiple * (choices - 1)
        grid = feasible_grid(min_alloc, max_alloc, multiple)
        values = _concave_values(rng, len(grid)) if concave else rng.integers(0, 31, size=len(grid))
        value_fn = BayValueFunction.tabulated(zip(grid, (float(v) for v in values)))
        specs.append(PogSpec(f"p{p:02d}", min_alloc, max_alloc, multiple, value_fn))

    low = sum((spec.min_alloc for spec in specs), Fraction(0))
    high = sum((spec.max_alloc for spec in specs), Fraction(0)) + 1
    total = low + HALF_BAY * int(rng.integers(0, int((high - low) * 2) + 1))
    return BayProblem(tuple(specs), total)


def random_log_bay_problem(rng: np.random.Generator, max_pogs: int = 4, max_choices: int = 8) -> BayProblem:
    """
    A feasible problem whose POGs share a whole-bay multiple, start at one bay or more and
    carry logarithmic value functions with b > 0.
    """
    count = int(rng.integers(1, max_pogs + 1))
    specs = []
    for p in range(count):
        min_alloc = int(rng.integers(1, 4))
        max_alloc = min_alloc + int(rng.integers(0, max_choices))
        value_fn = BayValueFunction.logarithmic(float(rng.integers(0, 50)), float(rng.integers(1, 40)))
        specs.append(PogSpec(f"p{p:02d}", min_alloc, max_alloc, 1, value_fn))
    low = sum(spec.min_alloc for spec in specs)
    high = sum(spec.max_alloc for spec in specs)
    return BayProblem(tuple(specs), low + int(rng.integers(0, high - low + 2)))
