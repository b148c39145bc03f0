"""
Stage 1: assortment selection inside one planogram as a linear 0/1 knapsack.

The exact solver is a dynamic program over (item, capacity). Items are processed from the
last to the first so that a single forward pass over the stored decisions recovers, for any
capacity, the optimal assortment with the smallest used space and, among those, the
lexicographically smallest bit vector. The capacity sweep reuses one table for every
capacity up to the POG's maximum.
"""
import enum
import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from .core_model import Assortment, Pog, SpaceUnit, WeightVector, build_objective_vector
from .errors import InstanceTooLarge, InvalidInput

logger = logging.getLogger(__name__)

MAX_TABLE_CELLS: int = 10**9
BRUTE_FORCE_MAX_ITEMS: int = 25
_BRUTE_FORCE_CHUNK: int = 1 << 16


class GreedyMode(enum.Enum):
    BY_VALUE = "value"
    BY_PRODUCTIVITY = "productivity"


@dataclass(frozen=True)
class KnapsackInstance:
    """
    Item widths (capacity units), item values and the capacity of one knapsack.

    Args:
        weights (Tuple[int, ...]): Positive integer widths.
        values (Tuple[float, ...]): Objective contributions, may be negative.
        capacity (int): Non-negative capacity.
    """

    weights: Tuple[int, ...]
    values: Tuple[float, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.weights) != len(self.values):
            raise InvalidInput(f"{len(self.weights)} weights but {len(self.values)} values")
        if any(w < 1 for w in self.weights):
            raise InvalidInput("every item weight must be at least 1 capacity unit")
        if int(self.capacity) != self.capacity or self.capacity < 0:
            raise InvalidInput(f"capacity must be a non-negative integer, got {self.capacity}")
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def n(self) -> int:
        return len(self.weights)

    @classmethod
    def from_pog(cls, pog: Pog, weights: WeightVector) -> "KnapsackInstance":
        if len(pog.items) == 0:
            return cls((), (), pog.capacity)
        values = build_objective_vector(pog.items, weights)
        return cls(tuple(item.space for item in pog.items), tuple(values), pog.capacity)


@dataclass(frozen=True)
class KnapsackSolution:
    selected: Tuple[int, ...]
    value: float
    used: int


@dataclass(frozen=True, eq=False)
class ValueCurve:
    """
    Optimal assortment value and selection of one POG for every capacity 0..c_max.

    Attributes:
        pog_id (str): The POG the curve belongs to.
        values (np.ndarray): values[j] is the optimal objective at capacity j.
        used (np.ndarray): used[j] is the space taken by the optimal assortment at capacity j.
        assortments (np.ndarray): assortments[j] is the optimal bit vector at capacity j.
        unit (SpaceUnit): The capacity unit.
    """

    pog_id: str
    values: np.ndarray
    used: np.ndarray
    assortments: np.ndarray
    unit: SpaceUnit

    @property
    def c_max(self) -> int:
        return len(self.values) - 1

    def value_at(self, capacity: int) -> float:
        self._check_capacity(capacity)
        return float(self.values[capacity])

    def assortment_at(self, capacity: int) -> Assortment:
        self._check_capacity(capacity)
        bits = tuple(int(b) for b in self.assortments[capacity])
        return Assortment(bits, float(self.values[capacity]), int(self.used[capacity]))

    def points(self) -> Iterator[Tuple[float, Tuple[int, ...]]]:
        for capacity in range(self.c_max + 1):
            yield float(self.values[capacity]), tuple(int(b) for b in self.assortments[capacity])

    def _check_capacity(self, capacity: int):
        if not 0 <= capacity <= self.c_max:
            raise InvalidInput(f"pog '{self.pog_id}': capacity {capacity} outside curve range 0..{self.c_max}")


def _fill_table(instance: KnapsackInstance) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Run the knapsack recurrence from the last item to the first.

    After processing item i, value_row[j] is the best objective using items i..n-1 within
    capacity j and used_row[j] the smallest space reaching it. An item is taken only when
    that strictly improves (value, -used), so ties keep the item out.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: The first-item value row, used row and the
        bit-packed decision table of shape (n, ceil((c+1)/8)).
    """
    n, capacity = instance.n, instance.capacity
    if n * capacity > MAX_TABLE_CELLS:
        raise InstanceTooLarge(
            f"knapsack table of {n} items x {capacity} capacity units exceeds {MAX_TABLE_CELLS} cells; "
            "use a coarser SpaceUnit (e.g. half-inch instead of quarter-inch increments)"
        )

    value_row = np.zeros(capacity + 1, dtype=np.float64)
    used_row = np.zeros(capacity + 1, dtype=np.int64)
    decisions = np.zeros((n, (capacity + 8) // 8), dtype=np.uint8)

    negatives = [i for i, v in enumerate(instance.values) if v < 0]
    if negatives:
        logger.debug("excluding %d item(s) with negative objective value: %s", len(negatives), negatives)

    for i in range(n - 1, -1, -1):
        weight, value = instance.weights[i], instance.values[i]
        if value < 0 or weight > capacity:
            continue

        take_value = value_row[:-weight] + value
        take_used = used_row[:-weight] + weight
        keep_value = value_row[weight:]
        keep_used = used_row[weight:]
        take = (take_value > keep_value) | ((take_value == keep_value) & (take_used < keep_used))

        row = np.zeros(capacity + 1, dtype=bool)
        row[weight:] = take
        decisions[i] = np.packbits(row)

        value_row[weight:] = np.where(take, take_value, keep_value)
        used_row[weight:] = np.where(take, take_used, keep_used)

    return value_row, used_row, decisions


def _backtrack(weights: Tuple[int, ...], decisions: np.ndarray, capacities: np.ndarray) -> np.ndarray:
    """Recover the selections for many capacities at once by walking the items forward."""
    remaining = np.asarray(capacities, dtype=np.int64).copy()
    bits = np.zeros((len(remaining), len(weights)), dtype=np.uint8)
    for i, weight in enumerate(weights):
        packed = decisions[i, remaining >> 3].astype(np.int64)
        taken = (packed >> (7 - (remaining & 7))) & 1
        bits[:, i] = taken
        remaining -= taken * weight
    return bits


def solve_dp(instance: KnapsackInstance) -> KnapsackSolution:
    """
    Solve a 0/1 knapsack exactly by dynamic programming in O(n*c) time.

    Items with negative value are never selected. Among optimal solutions the one with the
    smallest used space is returned, then the lexicographically smallest bit vector.

    Args:
        instance (KnapsackInstance): The knapsack to solve.

    Returns:
        KnapsackSolution: The optimal selection, its value and used space.
    """
    value_row, used_row, decisions = _fill_table(instance)
    capacity = instance.capacity
    bits = _backtrack(instance.weights, decisions, np.array([capacity]))[0]
    return KnapsackSolution(
        selected=tuple(int(b) for b in bits),
        value=float(value_row[capacity]),
        used=int(used_row[capacity]),
    )


def solve_curve(pog: Pog, weights: WeightVector) -> ValueCurve:
    """
    Compute the optimal assortment of a POG for every capacity from 0 to pog.capacity with a
    single table pass.

    Args:
        pog (Pog): The planogram; its capacity is the largest capacity of the sweep.
        weights (WeightVector): Objective weights.

    Returns:
        ValueCurve: Optimal values, used space and selections per capacity.
    """
    instance = KnapsackInstance.from_pog(pog, weights)
    value_row, used_row, decisions = _fill_table(instance)
    assortments = _backtrack(instance.weights, decisions, np.arange(instance.capacity + 1))

    for array in (value_row, used_row, assortments):
        array.flags.writeable = False
    logger.debug("pog '%s': value curve over %d capacities, %d items", pog.id, instance.capacity + 1, instance.n)
    return ValueCurve(pog.id, value_row, used_row, assortments, pog.unit)


def solve_brute_force(instance: KnapsackInstance) -> KnapsackSolution:
    """
    Enumerate every subset. Used as the reference solver; same tie-break as solve_dp.

    Args:
        instance (KnapsackInstance): At most 25 items.

    Returns:
        KnapsackSolution: The optimal selection.
    """
    n = instance.n
    if n > BRUTE_FORCE_MAX_ITEMS:
        raise InstanceTooLarge(f"brute force is limited to {BRUTE_FORCE_MAX_ITEMS} items, got {n}")

    weights = np.array(instance.weights, dtype=np.int64)
    values = np.array(instance.values, dtype=np.float64)
    # item i is bit n-1-i, so a smaller mask is a lexicographically smaller bit vector
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)

    best_value, best_used, best_mask = -np.inf, 0, 0
    for start in range(0, 1 << n, _BRUTE_FORCE_CHUNK):
        masks = np.arange(start, min(start + _BRUTE_FORCE_CHUNK, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        used = bits @ weights
        total = bits.astype(np.float64) @ values

        feasible = used <= instance.capacity
        if not feasible.any():
            continue
        masks, used, total = masks[feasible], used[feasible], total[feasible]
        k = np.lexsort((masks, used, -total))[0]

        # later chunks only hold larger masks, so only a strictly better (value, used) wins
        if total[k] > best_value or (total[k] == best_value and used[k] < best_used):
            best_value, best_used, best_mask = float(total[k]), int(used[k]), int(masks[k])

    selected = tuple((best_mask >> (n - 1 - i)) & 1 for i in range(n))
    return KnapsackSolution(selected, best_value, best_used)


def solve_greedy(instance: KnapsackInstance, mode: GreedyMode = GreedyMode.BY_PRODUCTIVITY) -> KnapsackSolution:
    """
    Admit items in descending order of value (BY_VALUE) or value per unit of width
    (BY_PRODUCTIVITY) while they fit. Items with non-positive value are skipped and an item
    that does not fit does not stop the scan. Ties go to the lower index.

    Args:
        instance (KnapsackInstance): The knapsack to solve.
        mode (GreedyMode): The ordering rule.

    Returns:
        KnapsackSolution: A feasible, usually suboptimal selection.
    """
    mode = GreedyMode(mode)
    if mode is GreedyMode.BY_VALUE:
        keys = list(instance.values)
    else:
        keys = [v / w for v, w in zip(instance.values, instance.weights)]
    order = sorted(range(instance.n), key=lambda i: (-keys[i], i))

    selected = [0] * instance.n
    remaining = instance.capacity
    for i in order:
        if instance.values[i] <= 0:
            continue
        if instance.weights[i] <= remaining:
            selected[i] = 1
            remaining -= instance.weights[i]

    value = float(sum(v for v, bit in zip(instance.values, selected) if bit))
    return KnapsackSolution(tuple(selected), value, instance.capacity - remaining)
