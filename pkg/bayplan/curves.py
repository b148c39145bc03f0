"""
Bay-level value functions: the bridge from stage-1 value curves to stage-2 bay allocation.

A value function maps an allocation in bays to the value a POG produces. It is either
tabulated (read off a knapsack value curve) or logarithmic, f(y) = a + b*ln(y), fitted to
observed (bays, value) points. Bay quantities are carried as exact Fractions so grid and
integrality checks never depend on floating point.
"""
import bisect
import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, List, Mapping, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .errors import DiminishingReturnsViolation, InvalidInput
from .pog_knapsack import ValueCurve

logger = logging.getLogger(__name__)

Bays = Union[int, float, str, Fraction]


def as_bays(value: Bays) -> Fraction:
    """
    Convert a bay quantity to an exact Fraction. Floats go through their decimal text so
    0.1 becomes 1/10; strings may be decimals ("0.5") or ratios ("1/2").
    """
    if isinstance(value, bool):
        raise InvalidInput(f"'{value}' is not a bay quantity")
    try:
        if isinstance(value, Rational):
            return Fraction(value)
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise ValueError
            return Fraction(repr(float(value)))
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as err:
        raise InvalidInput(f"'{value}' is not a bay quantity") from err


def feasible_grid(min_alloc: Bays, max_alloc: Bays, multiple: Bays) -> Tuple[Fraction, ...]:
    """
    All allocations min, min+m, ..., max.

    Args:
        min_alloc (Bays): Smallest allowed allocation.
        max_alloc (Bays): Largest allowed allocation.
        multiple (Bays): Allocation step, must divide max - min.

    Returns:
        Tuple[Fraction, ...]: The grid in ascending order.
    """
    low, high, step = as_bays(min_alloc), as_bays(max_alloc), as_bays(multiple)
    if step <= 0:
        raise InvalidInput(f"multiple must be positive, got {step}")
    if low > high:
        raise InvalidInput(f"min allocation {low} exceeds max allocation {high}")
    count = (high - low) / step
    if count.denominator != 1:
        raise InvalidInput(f"multiple {step} does not divide the range [{low}, {high}]")
    return tuple(low + k * step for k in range(int(count) + 1))


def bays_to_capacity(bays: Bays, units_per_bay: int) -> int:
    """
    Capacity units of an allocation, rounded to the nearest integer with ties going down.

    Args:
        bays (Bays): Allocation in bays.
        units_per_bay (int): Capacity units in one bay.

    Returns:
        int: The capacity to look up on a value curve.
    """
    exact = as_bays(bays) * units_per_bay
    lower = math.floor(exact)
    if exact == lower:
        return lower
    capacity = lower + 1 if exact - lower > Fraction(1, 2) else lower
    logger.debug("%s bays x %d units/bay = %s units, rounded to %d", bays, units_per_bay, exact, capacity)
    return capacity


class CurveKind(enum.Enum):
    TABULATED = "tabulated"
    LOGARITHMIC = "logarithmic"


class ConcavityViolation(NamedTuple):
    left: Fraction
    middle: Fraction
    right: Fraction
    shortfall: float


@dataclass(frozen=True, eq=False)
class BayValueFunction:
    """
    Value of a POG as a function of its allocation in bays.

    Use the `tabulated` and `logarithmic` constructors rather than building one directly.
    """

    kind: CurveKind
    table: Tuple[Tuple[Fraction, float], ...] = ()
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def tabulated(cls, points: Union[Mapping[Bays, float], Iterable[Tuple[Bays, float]]]) -> "BayValueFunction":
        pairs = points.items() if isinstance(points, Mapping) else points
        table = {}
        for y, value in pairs:
            y = as_bays(y)
            if y in table:
                raise InvalidInput(f"duplicate allocation {y} in tabulated value function")
            try:
                value = float(value)
            except (TypeError, ValueError) as err:
                raise InvalidInput(f"value at {y} bays is not a number: '{value}'") from err
            if not math.isfinite(value):
                raise InvalidInput(f"value at {y} bays is not finite")
            table[y] = value
        if not table:
            raise InvalidInput("a tabulated value function needs at least one point")
        return cls(CurveKind.TABULATED, tuple(sorted(table.items())))

    @classmethod
    def logarithmic(cls, a: float, b: float) -> "BayValueFunction":
        if b < 0:
            raise DiminishingReturnsViolation(a, b)
        return cls(CurveKind.LOGARITHMIC, (), float(a), float(b))

    @property
    def grid(self) -> Tuple[Fraction, ...]:
        return tuple(y for y, _ in self.table)

    def has_point(self, y: Bays) -> bool:
        """True when the function is tabulated exactly at y."""
        if self.kind is not CurveKind.TABULATED:
            return False
        y = as_bays(y)
        index = bisect.bisect_left(self.grid, y)
        return index < len(self.table) and self.table[index][0] == y

    def __call__(self, y: Bays) -> float:
        y = as_bays(y)
        if self.kind is CurveKind.LOGARITHMIC:
            if y <= 0:
                raise InvalidInput(f"logarithmic value function is undefined at {y} bays")
            return self.a + self.b * math.log(y)

        grid = self.grid
        index = bisect.bisect_left(grid, y)
        if index < len(grid) and grid[index] == y:
            return self.table[index][1]
        if index == 0 or index == len(grid):
            raise InvalidInput(f"value function is tabulated on [{grid[0]}, {grid[-1]}] bays, not at {y}")
        (y0, v0), (y1, v1) = self.table[index - 1], self.table[index]
        return v0 + (v1 - v0) * float((y - y0) / (y1 - y0))

    def to_dict(self) -> dict:
        if self.kind is CurveKind.LOGARITHMIC:
            return {"log": {"a": self.a, "b": self.b}}
        return {"values": {str(y): value for y, value in self.table}}


def curve_from_pog(
    curve: ValueCurve,
    units_per_bay: int,
    min_alloc: Bays,
    max_alloc: Bays,
    multiple: Bays,
) -> BayValueFunction:
    """
    Read a POG's value at every feasible bay allocation off its knapsack value curve.

    Args:
        curve (ValueCurve): Stage-1 output for the POG.
        units_per_bay (int): Capacity units in one bay.
        min_alloc (Bays): Smallest allowed allocation.
        max_alloc (Bays): Largest allowed allocation.
        multiple (Bays): Allocation step.

    Returns:
        BayValueFunction: Tabulated at min, min+m, ..., max.
    """
    if int(units_per_bay) != units_per_bay or units_per_bay < 1:
        raise InvalidInput(f"units_per_bay must be a positive integer, got {units_per_bay}")
    table = {}
    for y in feasible_grid(min_alloc, max_alloc, multiple):
        capacity = bays_to_capacity(y, int(units_per_bay))
        if capacity > curve.c_max:
            raise InvalidInput(
                f"pog '{curve.pog_id}': value curve ends at {curve.c_max} units but {y} bays "
                f"need {capacity} units"
            )
        table[y] = curve.value_at(capacity)
    return BayValueFunction.tabulated(table)


def fit_log(points: Sequence[Tuple[float, float]]) -> BayValueFunction:
    """
    Least-squares fit of value = a + b*ln(y) in (ln y, value) space.

    Args:
        points (Sequence[Tuple[float, float]]): Observed (bays, value) pairs, bays > 0.

    Returns:
        BayValueFunction: The fitted logarithmic function.

    Raises:
        DiminishingReturnsViolation: If the fitted slope is negative; carries (a, b) so the
            caller can fall back to a tabulated function.
    """
    y = np.array([float(p[0]) for p in points], dtype=float)
    values = np.array([float(p[1]) for p in points], dtype=float)
    if np.any(~(y > 0)):
        raise InvalidInput("every allocation must be positive to fit a logarithmic curve")
    if len(np.unique(y)) < 2:
        raise InvalidInput("at least two distinct allocations are needed to fit a curve")

    x = np.log(y)
    x_centered = x - x.mean()
    b = float(x_centered @ (values - values.mean()) / (x_centered @ x_centered))
    a = float(values.mean() - b * x.mean())
    if b < 0:
        raise DiminishingReturnsViolation(a, b)
    return BayValueFunction.logarithmic(a, b)


def check_concavity(f: BayValueFunction, grid: Sequence[Bays]) -> List[ConcavityViolation]:
    """
    Find consecutive grid triples where f lies below the chord of its neighbours.

    Args:
        f (BayValueFunction): The function to test.
        grid (Sequence[Bays]): Ascending allocations to test on.

    Returns:
        List[ConcavityViolation]: Empty exactly when f is concave on the grid.
    """
    if f.kind is CurveKind.LOGARITHMIC:
        return []
    grid = [as_bays(y) for y in grid]
    values = [f(y) for y in grid]
    violations = []
    for k in range(1, len(grid) - 1):
        (y1, y2, y3), (f1, f2, f3) = grid[k - 1 : k + 2], values[k - 1 : k + 2]
        chord = f1 + (f3 - f1) * float((y2 - y1) / (y3 - y1))
        if f2 < chord - 1e-9 * abs(f3):
            violations.append(ConcavityViolation(y1, y2, y3, chord - f2))
    return violations


def concave_majorant(f: BayValueFunction, grid: Sequence[Bays]) -> BayValueFunction:
    """
    Smallest concave function lying above f on the grid, tabulated on the same grid.

    Args:
        f (BayValueFunction): The function to repair.
        grid (Sequence[Bays]): Ascending allocations.

    Returns:
        BayValueFunction: Tabulated upper hull of (y, f(y)).
    """
    grid = [as_bays(y) for y in grid]
    points = [(y, f(y)) for y in grid]
    hull: List[Tuple[Fraction, float]] = []
    for point in points:
        while len(hull) >= 2:
            (x0, v0), (x1, v1) = hull[-2], hull[-1]
            # drop the middle point when it is on or below the chord to the new point
            if float(x1 - x0) * (point[1] - v0) - (v1 - v0) * float(point[0] - x0) >= 0:
                hull.pop()
            else:
                break
        hull.append(point)

    xs = [float(x) for x, _ in hull]
    vs = [v for _, v in hull]
    repaired = np.interp([float(y) for y in grid], xs, vs)
    return BayValueFunction.tabulated(zip(grid, repaired.tolist()))
