"""
Stage 2: distribute a department's bays across its POGs.

Each POG i receives y_i = m_i * x_i bays with min_i <= y_i <= max_i and sum y_i <= s. The
objective sums piecewise-linear approximations f^a_i of the POG value functions built on
integer breakpoints. Because the problem is separable and every y_i lives on a finite
grid, it is solved exactly as a multiple-choice knapsack: one allocation per POG, costs in
units of the common grid step, dynamic programming over (POG, used grid units).

`emit_standard_form` writes the equivalent linear MIP in CPLEX LP syntax so an external
MIP solver can cross-check `solve_exact`.
"""
import functools
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curves import Bays, BayValueFunction, as_bays, check_concavity, feasible_grid
from .errors import ConcavityRequired, InstanceTooLarge, Infeasible, InvalidInput

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_COMBINATIONS: int = 10**6


def _gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator * b.denominator, b.numerator * a.denominator), a.denominator * b.denominator)


@dataclass(frozen=True)
class PiecewiseModel:
    """
    Piecewise-linear approximation of one POG's value function.

    y = sum_j j*lambda_j with sum_j lambda_j = 1 and lambda_j >= 0; for a concave function
    only two adjacent lambdas are ever non-zero, which `convex_weights` constructs directly.
    """

    pog_id: str
    breakpoints: Tuple[Fraction, ...]
    values: Tuple[float, ...]

    def evaluate(self, y: Bays) -> float:
        weights = self.convex_weights(y)
        return float(sum(w * v for w, v in zip(weights, self.values) if w))

    def convex_weights(self, y: Bays) -> Tuple[float, ...]:
        """The lambda vector realizing y using the two breakpoints that bracket it."""
        y = as_bays(y)
        low, high = self.breakpoints[0], self.breakpoints[-1]
        if not low <= y <= high:
            raise InvalidInput(f"pog '{self.pog_id}': {y} bays outside breakpoint range [{low}, {high}]")
        weights = [0.0] * len(self.breakpoints)
        for j in range(len(self.breakpoints)):
            if self.breakpoints[j] == y:
                weights[j] = 1.0
                return tuple(weights)
            if self.breakpoints[j] < y < self.breakpoints[j + 1]:
                share = (y - self.breakpoints[j]) / (self.breakpoints[j + 1] - self.breakpoints[j])
                weights[j] = float(1 - share)
                weights[j + 1] = float(share)
                return tuple(weights)
        raise AssertionError("unreachable: y bracketed by breakpoints")


@dataclass(frozen=True, eq=False)
class PogSpec:
    """
    Allocation constraints and value function of one POG.

    Args:
        pog_id (str): POG identifier.
        min_alloc (Bays): Minimum bays, a multiple of `multiple`.
        max_alloc (Bays): Maximum bays.
        multiple (Bays): Allocation step, e.g. 1/2 for half bays.
        value_fn (BayValueFunction): Value as a function of allocated bays.
    """

    pog_id: str
    min_alloc: Fraction
    max_alloc: Fraction
    multiple: Fraction
    value_fn: BayValueFunction

    def __post_init__(self):
        for name in ("min_alloc", "max_alloc", "multiple"):
            object.__setattr__(self, name, as_bays(getattr(self, name)))
        if self.min_alloc < 0:
            raise InvalidInput(f"pog '{self.pog_id}': min allocation must be non-negative")
        try:
            feasible_grid(self.min_alloc, self.max_alloc, self.multiple)
        except InvalidInput as err:
            raise InvalidInput(f"pog '{self.pog_id}': {err}") from err
        if (self.min_alloc / self.multiple).denominator != 1:
            raise InvalidInput(f"pog '{self.pog_id}': min allocation {self.min_alloc} is not a multiple of {self.multiple}")
        if not isinstance(self.value_fn, BayValueFunction):
            raise InvalidInput(f"pog '{self.pog_id}': value_fn must be a BayValueFunction")

    @property
    def grid(self) -> Tuple[Fraction, ...]:
        return feasible_grid(self.min_alloc, self.max_alloc, self.multiple)


@dataclass(frozen=True, eq=False)
class BayProblem:
    """
    A department's bay allocation problem. POGs are kept sorted by id.

    Args:
        pogs (Sequence[PogSpec]): At least one POG, ids unique.
        total_bays (Bays): Bays available to the department.
    """

    pogs: Tuple[PogSpec, ...]
    total_bays: Fraction
    base_unit: Fraction = field(init=False)

    def __post_init__(self):
        pogs = tuple(sorted(self.pogs, key=lambda spec: spec.pog_id))
        if not pogs:
            raise InvalidInput("a bay problem needs at least one pog")
        ids = [spec.pog_id for spec in pogs]
        if len(set(ids)) != len(ids):
            raise InvalidInput(f"duplicate pog ids in bay problem: {ids}")
        total = as_bays(self.total_bays)
        if total < 0:
            raise InvalidInput(f"total bays must be non-negative, got {total}")

        base = functools.reduce(_gcd, (spec.multiple for spec in pogs))
        fractional = total - math.floor(total)
        if fractional:
            base = _gcd(base, fractional)

        object.__setattr__(self, "pogs", pogs)
        object.__setattr__(self, "total_bays", total)
        object.__setattr__(self, "base_unit", base)

    @property
    def deficit(self) -> Fraction:
        """Bays missing to honour every minimum; zero or negative when feasible."""
        return sum((spec.min_alloc for spec in self.pogs), Fraction(0)) - self.total_bays

    @property
    def grid_budget(self) -> int:
        return math.floor(self.total_bays / self.base_unit)

    def check_feasible(self):
        if self.deficit > 0:
            raise Infeasible(self.deficit)

    def choices(self, index: int) -> List[Tuple[Fraction, int, float]]:
        """(allocation, cost in grid units, approximated value) for every grid point of a POG."""
        spec = self.pogs[index]
        model = build_piecewise(spec)
        choices = []
        for y in spec.grid:
            value = spec.value_fn(y) if spec.value_fn.has_point(y) else model.evaluate(y)
            cost = y / self.base_unit
            assert cost.denominator == 1
            choices.append((y, int(cost), value))
        return choices


@dataclass(frozen=True)
class BayAllocation:
    """
    Solved allocation. integer_counts[i] * multiple_i == allocations[i] exactly.
    """

    allocations: Dict[str, Fraction]
    integer_counts: Dict[str, int]
    objective: float
    slack: Fraction

    def to_dict(self) -> dict:
        return {
            "allocations": {k: float(v) for k, v in sorted(self.allocations.items())},
            "integer_counts": dict(sorted(self.integer_counts.items())),
            "objective": self.objective,
            "slack": float(self.slack),
        }


def _breakpoints(spec: PogSpec) -> Tuple[Fraction, ...]:
    low, high = spec.min_alloc, spec.max_alloc
    inner = range(math.floor(low) + 1, math.ceil(high))
    return tuple(sorted({low, high, *(Fraction(j) for j in inner)}))


def build_piecewise(spec: PogSpec) -> PiecewiseModel:
    """
    Build the piecewise-linear approximation of a POG's value function on integer
    breakpoints between min and max (plus min and max themselves when not integers).

    Args:
        spec (PogSpec): The POG.

    Returns:
        PiecewiseModel: Breakpoints and the exact function values there.
    """
    breakpoints = _breakpoints(spec)
    try:
        values = tuple(spec.value_fn(j) for j in breakpoints)
    except InvalidInput as err:
        raise InvalidInput(f"pog '{spec.pog_id}': value function undefined at a breakpoint: {err}") from err
    return PiecewiseModel(spec.pog_id, breakpoints, values)


def _allocation(problem: BayProblem, picks: Sequence[Fraction], objective: float) -> BayAllocation:
    allocations, counts = {}, {}
    for spec, y in zip(problem.pogs, picks):
        count = y / spec.multiple
        assert count.denominator == 1 and spec.min_alloc <= y <= spec.max_alloc
        allocations[spec.pog_id] = y
        counts[spec.pog_id] = int(count)
    slack = problem.total_bays - sum(picks, Fraction(0))
    assert slack >= 0
    return BayAllocation(allocations, counts, objective, slack)


def _total(values: Sequence[float]) -> float:
    # summed right to left, the association the dynamic program uses
    total = 0.0
    for value in reversed(values):
        total = value + total
    return total


def solve_exact(problem: BayProblem) -> BayAllocation:
    """
    Maximize the sum of approximated POG values subject to the grid, min/max and budget
    constraints. Runs in O(P * S * K) for P POGs, S budget grid units and K choices per POG.

    Among optimal allocations the one using the fewest bays is returned, then the
    lexicographically smallest allocation vector in POG id order.

    Args:
        problem (BayProblem): A feasible problem.

    Returns:
        BayAllocation: The optimal allocation.
    """
    problem.check_feasible()
    budget = problem.grid_budget
    count = len(problem.pogs)
    choices = [problem.choices(i) for i in range(count)]

    # best_value[u], best_cost[u]: optimum of POGs p..P-1 within u grid units
    best_value = np.zeros(budget + 1)
    best_cost = np.zeros(budget + 1, dtype=np.int64)
    picks = np.full((count, budget + 1), -1, dtype=np.int64)

    for p in range(count - 1, -1, -1):
        value = np.full(budget + 1, -np.inf)
        cost = np.zeros(budget + 1, dtype=np.int64)
        for k, (_, step_cost, step_value) in enumerate(choices[p]):
            if step_cost > budget:
                break
            candidate_value = np.full(budget + 1, -np.inf)
            candidate_cost = np.zeros(budget + 1, dtype=np.int64)
            candidate_value[step_cost:] = step_value + best_value[: budget + 1 - step_cost]
            candidate_cost[step_cost:] = step_cost + best_cost[: budget + 1 - step_cost]
            better = (candidate_value > value) | ((candidate_value == value) & (candidate_cost < cost))
            value = np.where(better, candidate_value, value)
            cost = np.where(better, candidate_cost, cost)
            picks[p] = np.where(better, k, picks[p])
        best_value, best_cost = value, cost

    if not np.isfinite(best_value[budget]):
        raise Infeasible(problem.deficit)

    remaining, chosen = budget, []
    for p in range(count):
        y, step_cost, _ = choices[p][picks[p, remaining]]
        chosen.append(y)
        remaining -= step_cost

    logger.debug("bay allocation objective %.6g over %d pogs, budget %d grid units", best_value[budget], count, budget)
    return _allocation(problem, chosen, float(best_value[budget]))


def solve_brute_force_bays(problem: BayProblem) -> BayAllocation:
    """
    Enumerate every combination of grid allocations. Reference solver for solve_exact with
    the same tie-break.

    Args:
        problem (BayProblem): A feasible problem with at most 10**6 combinations.

    Returns:
        BayAllocation: The optimal allocation.
    """
    problem.check_feasible()
    choices = [problem.choices(i) for i in range(len(problem.pogs))]
    combinations = math.prod(len(c) for c in choices)
    if combinations > BRUTE_FORCE_MAX_COMBINATIONS:
        raise InstanceTooLarge(f"{combinations} allocation combinations exceed {BRUTE_FORCE_MAX_COMBINATIONS}")

    budget = problem.grid_budget
    best: Optional[Tuple[float, int, Tuple]] = None
    # product() yields combinations in lexicographic order, so the first optimum found wins ties
    for combination in itertools.product(*choices):
        cost = sum(c[1] for c in combination)
        if cost > budget:
            continue
        value = _total([c[2] for c in combination])
        if best is None or value > best[0] or (value == best[0] and cost < best[1]):
            best = (value, cost, combination)

    if best is None:
        raise Infeasible(problem.deficit)
    return _allocation(problem, [c[0] for c in best[2]], best[0])


def greedy_marginal(problem: BayProblem) -> BayAllocation:
    """
    Start every POG at its minimum and repeatedly grant one allocation step to the POG with
    the largest marginal gain, while the gain is positive and the step fits. Optimal for
    concave value functions with a common step.

    Args:
        problem (BayProblem): A feasible problem whose value functions are concave.

    Returns:
        BayAllocation: The greedy allocation.
    """
    problem.check_feasible()
    for spec in problem.pogs:
        violations = check_concavity(spec.value_fn, spec.grid)
        if violations:
            raise ConcavityRequired(spec.pog_id, violations)

    choices = [problem.choices(i) for i in range(len(problem.pogs))]
    level = [0] * len(choices)
    remaining = problem.grid_budget - sum(c[0][1] for c in choices)

    def push(heap: list, p: int):
        if level[p] + 1 < len(choices[p]):
            gain = choices[p][level[p] + 1][2] - choices[p][level[p]][2]
            heapq.heappush(heap, (-gain, p))

    heap: List[Tuple[float, int]] = []
    for p in range(len(choices)):
        push(heap, p)

    while heap:
        negative_gain, p = heapq.heappop(heap)
        if -negative_gain <= 0:
            break
        step = choices[p][level[p] + 1][1] - choices[p][level[p]][1]
        if step > remaining:
            continue
        level[p] += 1
        remaining -= step
        push(heap, p)

    picks = [choices[p][level[p]] for p in range(len(choices))]
    return _allocation(problem, [c[0] for c in picks], _total([c[2] for c in picks]))


def _number(value) -> str:
    value = float(value)
    return "%.17g" % (0.0 if value == 0 else value)


def _term(coefficient, name: str) -> str:
    value = float(coefficient)
    return "%+.17g %s\n" % (0.0 if value == 0 else value, name)


def emit_standard_form(problem: BayProblem) -> str:
    """
    Write the linearized bay allocation MIP in CPLEX LP syntax.

    Variables: x_i (integer steps of POG i), lam_i_j (breakpoint weights), z_i and z_{P+i}.
    Rows z_i + m_i*x_i - sum_j j*lam_i_j = 0 link allocation and breakpoints, rows
    z_{P+i} - sum_j lam_i_j = 0 make the weights a convex combination, and the budget row
    bounds sum_i m_i*x_i by the total bays. z_i is fixed to 0 and z_{P+i} to 1 in the
    bounds section.

    Args:
        problem (BayProblem): The problem to serialize.

    Returns:
        str: LP-format model text.
    """
    count = len(problem.pogs)
    models = [build_piecewise(spec) for spec in problem.pogs]

    output = ["\\* bay allocation standard form *\\\n"]
    for i, spec in enumerate(problem.pogs):
        output.append(f"\\* pog {i}: {spec.pog_id} *\\\n")

    output.append("\nmax\nobj:\n")
    for i, model in enumerate(models):
        for j, value in enumerate(model.values):
            output.append(_term(value, f"lam_{i}_{j}"))

    output.append("\ns.t.\n")
    for i, (spec, model) in enumerate(zip(problem.pogs, models)):
        output.append(f"\nc_e_zlink_{i}_:\n")
        output.append(_term(1, f"z_{i}"))
        output.append(_term(spec.multiple, f"x_{i}"))
        for j, breakpoint in enumerate(model.breakpoints):
            output.append(_term(-breakpoint, f"lam_{i}_{j}"))
        output.append("= 0\n")
    for i, model in enumerate(models):
        output.append(f"\nc_e_zconv_{i}_:\n")
        output.append(_term(1, f"z_{count + i}"))
        for j in range(len(model.breakpoints)):
            output.append(_term(-1, f"lam_{i}_{j}"))
        output.append("= 0\n")
    output.append("\nc_u_budget_:\n")
    for i, spec in enumerate(problem.pogs):
        output.append(_term(spec.multiple, f"x_{i}"))
    output.append(f"<= {_number(problem.total_bays)}\n")

    output.append("\nbounds\n")
    for i in range(count):
        output.append(f"   0 <= z_{i} <= 0\n")
    for i in range(count):
        output.append(f"   1 <= z_{count + i} <= 1\n")
    for i in range(count):
        output.append(f"   0 <= x_{i} <= +inf\n")
    for i, model in enumerate(models):
        for j in range(len(model.breakpoints)):
            output.append(f"   0 <= lam_{i}_{j} <= +inf\n")
    output.append("general\n")
    for i in range(count):
        output.append(f"  x_{i}\n")
    output.append("end\n")
    return "".join(output)
