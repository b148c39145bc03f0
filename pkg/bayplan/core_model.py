"""
Domain types shared by both optimization stages: items, planograms (POGs), objective
weights and the shelf-space discretization unit, plus the construction of the per-item
objective vector used by the assortment knapsack.
"""
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import InvalidInput


class Locality(enum.Enum):
    LOCAL = "Local"
    NON_LOCAL = "NonLocal"


def parse_locality(text: str) -> Locality:
    """
    Parse a locality flag as written in an items file.

    Args:
        text (str): "local", "nonlocal" or "non-local" in any case.

    Returns:
        Locality: The parsed flag.
    """
    normalized = str(text).strip().lower().replace("-", "").replace("_", "")
    if normalized == "local":
        return Locality.LOCAL
    if normalized == "nonlocal":
        return Locality.NON_LOCAL
    raise InvalidInput(f"unknown locality '{text}', expected Local or NonLocal")


@dataclass(frozen=True)
class SpaceUnit:
    """The width of one capacity unit, e.g. 0.5 for half-inch increments."""

    inches_per_unit: float

    def __post_init__(self):
        if not self.inches_per_unit > 0:
            raise InvalidInput(f"inches_per_unit must be positive, got {self.inches_per_unit}")

    def to_inches(self, units: int) -> float:
        return units * self.inches_per_unit


@dataclass(frozen=True)
class WeightVector:
    """
    Objective weights over sales, margin, units and similarity to the baseline assortment.
    Only the ratios matter for which assortment is optimal; no normalization is applied.
    """

    sales: float = 0.0
    margin: float = 0.0
    units: float = 0.0
    similarity: float = 0.0

    def __post_init__(self):
        components = self.as_tuple()
        if any(not math.isfinite(c) or c < 0 for c in components):
            raise InvalidInput(f"weights must be finite and non-negative, got {components}")
        if not any(c > 0 for c in components):
            raise InvalidInput("at least one weight must be positive")

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.sales, self.margin, self.units, self.similarity)

    def to_dict(self) -> dict:
        return {"sales": self.sales, "margin": self.margin, "units": self.units, "similarity": self.similarity}


@dataclass(frozen=True)
class Item:
    """
    A potential SKU of a planogram.

    Attributes:
        id (str): Item identifier, unique within its POG.
        space (int): Width in SpaceUnit increments, at least 1.
        price (float): Average selling price per unit.
        margin (float): Average margin per unit; negative for loss leaders.
        demand (float): Expected units over the planning horizon.
        in_baseline (bool): Whether the item is part of the currently stocked assortment.
        locality (Locality): Local items have own sales history, non-local ones are estimates.
    """

    id: str
    space: int
    price: float
    margin: float
    demand: float
    in_baseline: bool = False
    locality: Locality = Locality.LOCAL

    def __post_init__(self):
        if not isinstance(self.space, (int, np.integer)) or isinstance(self.space, bool):
            raise InvalidInput(f"item '{self.id}': space must be an integer number of units")
        if self.space < 1:
            raise InvalidInput(f"item '{self.id}': space must be at least 1 unit, got {self.space}")
        if not self.demand >= 0:
            raise InvalidInput(f"item '{self.id}': demand must be non-negative, got {self.demand}")
        if not self.price >= 0:
            raise InvalidInput(f"item '{self.id}': price must be non-negative, got {self.price}")
        if not math.isfinite(self.margin):
            raise InvalidInput(f"item '{self.id}': margin must be finite")


@dataclass(frozen=True)
class Pog:
    """A planogram: the candidate items of one display unit and its shelf capacity."""

    id: str
    items: Tuple[Item, ...]
    capacity: int
    unit: SpaceUnit = field(default_factory=lambda: SpaceUnit(1.0))

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.capacity < 0:
            raise InvalidInput(f"pog '{self.id}': capacity must be non-negative, got {self.capacity}")
        seen = set()
        for item in self.items:
            if item.id in seen:
                raise InvalidInput(f"pog '{self.id}': duplicate item id '{item.id}'")
            seen.add(item.id)


@dataclass(frozen=True)
class Assortment:
    """A selection over a POG's items with its objective value and used space."""

    bits: Tuple[int, ...]
    value: float
    used: int

    def recompute(self, objective: Sequence[float]) -> float:
        return float(np.dot(np.asarray(self.bits, dtype=float), np.asarray(objective, dtype=float)))

    def selected_indices(self) -> List[int]:
        return [i for i, bit in enumerate(self.bits) if bit]


@dataclass(frozen=True)
class Metrics:
    sales: float = 0.0
    margin: float = 0.0
    units: float = 0.0

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(self.sales + other.sales, self.margin + other.margin, self.units + other.units)

    def to_dict(self) -> dict:
        return {"sales": self.sales, "margin": self.margin, "units": self.units}


def build_objective_vector(items: Sequence[Item], weights: WeightVector) -> np.ndarray:
    """
    Compute each item's contribution to the linear assortment objective.

    The demand multiplier m_i = p_i*sales + g_i*margin + units turns expected demand into a
    blended performance measure; the similarity term rewards keeping baseline items and
    penalizes adding new ones by the same amount.

    Args:
        items (Sequence[Item]): The candidate items.
        weights (WeightVector): The objective weights.

    Returns:
        np.ndarray: q with q_i = m_i*d_i + (2*x0_i - 1)*similarity. May contain negatives.
    """
    if len(items) == 0:
        raise InvalidInput("cannot build an objective vector for an empty item list")

    price = np.array([item.price for item in items], dtype=float)
    margin = np.array([item.margin for item in items], dtype=float)
    demand = np.array([item.demand for item in items], dtype=float)
    baseline = np.array([1.0 if item.in_baseline else 0.0 for item in items])

    multiplier = price * weights.sales + margin * weights.margin + weights.units
    return multiplier * demand + (2.0 * baseline - 1.0) * weights.similarity


def discretize_space(width_inches: float, unit: SpaceUnit) -> int:
    """
    Convert a physical width to capacity units, rounding up so a discretized assortment
    never overflows the real shelf.

    Args:
        width_inches (float): Physical width, strictly positive.
        unit (SpaceUnit): The discretization unit.

    Returns:
        int: ceil(width_inches / inches_per_unit), at least 1.
    """
    if not width_inches > 0:
        raise InvalidInput(f"width must be positive, got {width_inches}")
    # decimal widths such as 12.3 are divided exactly, 12.0 / 0.1 would give 120.00000000000001
    ratio = Fraction(str(width_inches)) / Fraction(str(unit.inches_per_unit))
    return max(1, math.ceil(ratio))


def similarity_to_baseline(x: Sequence[int], x0: Sequence[int]) -> int:
    """
    Similarity of an assortment to the baseline: baseline items kept minus new items added.

    Args:
        x (Sequence[int]): Assortment bits.
        x0 (Sequence[int]): Baseline bits of the same length.

    Returns:
        int: sum_i (2*x0_i - 1) * x_i.
    """
    if len(x) != len(x0):
        raise InvalidInput(f"assortment has {len(x)} positions but baseline has {len(x0)}")
    x = np.asarray(x, dtype=np.int64)
    x0 = np.asarray(x0, dtype=np.int64)
    return int(np.sum((2 * x0 - 1) * x))


def baseline_bits(pog: Pog) -> Tuple[int, ...]:
    return tuple(1 if item.in_baseline else 0 for item in pog.items)


def evaluate_metrics(items: Sequence[Item], bits: Iterable[int]) -> Metrics:
    """
    Project sales, margin and units of a selection under the linear demand model.

    Args:
        items (Sequence[Item]): The candidate items.
        bits (Iterable[int]): Selection aligned with items.

    Returns:
        Metrics: sales = sum p_i*d_i, margin = sum g_i*d_i, units = sum d_i over selected items.
    """
    sales = margin = units = 0.0
    for item, bit in zip(items, bits):
        if bit:
            sales += item.price * item.demand
            margin += item.margin * item.demand
            units += item.demand
    return Metrics(sales, margin, units)
