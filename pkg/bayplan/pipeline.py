"""
End-to-end department planning.

A scenario couples the candidate items of every POG (CSV) with the department's bay
constraints and objective weights (YAML). `run_scenario` solves the assortment knapsack of
every POG across all capacities, turns the value curves into bay-level value functions,
allocates the department's bays and reports projected sales, margin and units against the
baseline plan. Lifts are model projections under the linear demand model, not realized
results.

Items file columns: pog_id, item_id, width_inches, price, margin, demand, in_baseline, locality
POGs file columns:  pog_id[, name]
Scenario file: see example/department_example/scenario.yaml
"""
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .bay_alloc import BayAllocation, BayProblem, PogSpec, solve_exact
from .config import Config, apply_overrides, load_config
from .core_model import (
    Item,
    Metrics,
    Pog,
    SpaceUnit,
    WeightVector,
    baseline_bits,
    discretize_space,
    evaluate_metrics,
    parse_locality,
)
from .curves import (
    BayValueFunction,
    as_bays,
    bays_to_capacity,
    check_concavity,
    concave_majorant,
    curve_from_pog,
    feasible_grid,
)
from .errors import BayplanError, ConfigError, Infeasible, InvalidInput, ParseError, add_context
from .instantiate import resolve_target
from .pog_knapsack import ValueCurve, solve_curve

logger = logging.getLogger(__name__)

ITEM_COLUMNS: Tuple[str, ...] = (
    "pog_id", "item_id", "width_inches", "price", "margin", "demand", "in_baseline", "locality",
)
POG_COLUMNS: Tuple[str, ...] = ("pog_id",)
METRICS: Tuple[str, ...] = ("sales", "margin", "units")
LIFT_BASIS: str = "model-projected"

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


@dataclass(frozen=True)
class BayConstraint:
    pog_id: str
    min_bays: Fraction
    max_bays: Fraction
    multiple: Fraction
    baseline_bays: Fraction


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Everything needed to plan one department.

    Attributes:
        department_id (str): Department identifier, used in messages and file names.
        pogs (Tuple[Pog, ...]): Candidate items per POG; capacity covers max_bays.
        weights (WeightVector): Stage-1 objective weights.
        units_per_bay (int): Capacity units in one bay.
        bay_constraints (Tuple[BayConstraint, ...]): min/max/multiple/baseline bays per POG.
        total_bays (Fraction): Bays available to the department.
        unit (SpaceUnit): Shelf-space discretization.
        concave_repair (bool): Replace non-concave bay value functions by their concave majorant.
        bay_solver (Callable): Stage-2 solver, BayProblem -> BayAllocation.
        max_workers (int): Threads for the stage-1 solves.
    """

    department_id: str
    pogs: Tuple[Pog, ...]
    weights: WeightVector
    units_per_bay: int
    bay_constraints: Tuple[BayConstraint, ...]
    total_bays: Fraction
    unit: SpaceUnit
    concave_repair: bool = False
    bay_solver: Callable[[BayProblem], BayAllocation] = solve_exact
    max_workers: int = 4

    def __post_init__(self):
        object.__setattr__(self, "pogs", tuple(sorted(self.pogs, key=lambda pog: pog.id)))
        object.__setattr__(self, "bay_constraints", tuple(sorted(self.bay_constraints, key=lambda c: c.pog_id)))
        object.__setattr__(self, "total_bays", as_bays(self.total_bays))
        context = f"department {self.department_id}"

        if int(self.units_per_bay) != self.units_per_bay or self.units_per_bay < 1:
            raise InvalidInput(f"{context}: units_per_bay must be a positive integer")
        pog_ids = [pog.id for pog in self.pogs]
        constrained = [c.pog_id for c in self.bay_constraints]
        for pog_id in constrained:
            if pog_id not in pog_ids:
                raise InvalidInput(f"{context}: bay constraints reference unknown pog '{pog_id}'")
        for pog in self.pogs:
            if pog.id not in constrained:
                raise InvalidInput(f"{context}: pog '{pog.id}' has no bay constraints")
            if pog.unit != self.unit:
                raise InvalidInput(f"{context}, pog {pog.id}: space unit differs from the scenario's")

        for c in self.bay_constraints:
            if c.baseline_bays not in feasible_grid(c.min_bays, c.max_bays, c.multiple):
                raise InvalidInput(
                    f"{context}, pog {c.pog_id}: baseline of {c.baseline_bays} bays is not a feasible allocation "
                    f"(min {c.min_bays}, max {c.max_bays}, multiple {c.multiple})"
                )
            needed = math.ceil(c.max_bays * self.units_per_bay)
            if self.pog(c.pog_id).capacity < needed:
                raise InvalidInput(f"{context}, pog {c.pog_id}: capacity below the {needed} units of max_bays")
        baseline_total = sum((c.baseline_bays for c in self.bay_constraints), Fraction(0))
        if baseline_total > self.total_bays:
            logger.warning("%s: baseline uses %s bays but only %s are available", context, baseline_total, self.total_bays)

    def pog(self, pog_id: str) -> Pog:
        for pog in self.pogs:
            if pog.id == pog_id:
                return pog
        raise InvalidInput(f"department {self.department_id}: unknown pog '{pog_id}'")

    def constraint(self, pog_id: str) -> BayConstraint:
        for c in self.bay_constraints:
            if c.pog_id == pog_id:
                return c
        raise InvalidInput(f"department {self.department_id}: pog '{pog_id}' has no bay constraints")


@dataclass(frozen=True)
class PogPlan:
    pog_id: str
    allocated_bays: Fraction
    capacity_units: int
    assortment: Tuple[str, ...]
    objective_value: float
    projected: Metrics
    baseline_bays: Fraction
    baseline_assortment: Tuple[str, ...]
    baseline: Metrics
    concavity_violations: int

    def to_dict(self) -> dict:
        return {
            "pog_id": self.pog_id,
            "allocated_bays": float(self.allocated_bays),
            "capacity_units": self.capacity_units,
            "assortment": list(self.assortment),
            "objective_value": self.objective_value,
            "projected": self.projected.to_dict(),
            "baseline_bays": float(self.baseline_bays),
            "baseline_assortment": list(self.baseline_assortment),
            "baseline": self.baseline.to_dict(),
            "concavity_violations": self.concavity_violations,
        }


@dataclass(frozen=True)
class PlanReport:
    """
    Result of one scenario run. Wall-clock fields live in metadata["timestamps"] only.
    """

    department_id: str
    pogs: Tuple[PogPlan, ...]
    projected: Metrics
    baseline: Metrics
    lift: Dict[str, Optional[float]]
    bay_objective: float
    slack: Fraction
    metadata: dict = field(default_factory=dict)

    def to_dict(self, include_timestamps: bool = True) -> dict:
        metadata = dict(self.metadata)
        if not include_timestamps:
            metadata.pop("timestamps", None)
        return {
            "department_id": self.department_id,
            "pogs": [plan.to_dict() for plan in self.pogs],
            "totals": {"projected": self.projected.to_dict(), "baseline": self.baseline.to_dict()},
            "lift_percent": dict(self.lift),
            "bay_objective": self.bay_objective,
            "slack_bays": float(self.slack),
            "metadata": metadata,
        }


@dataclass(frozen=True)
class RunSummary:
    runs: int
    mean: Dict[str, float]
    sd: Dict[str, float]

    def cell(self, metric: str) -> str:
        # "+ 0.0" keeps a negative zero mean from printing as -0.00
        return f"{self.mean[metric] + 0.0:.2f} ± {self.sd[metric] + 0.0:.2f}"


def lift_percent(projected: float, baseline: float) -> Optional[float]:
    """Percentage change of a projected metric over its baseline, None when the baseline is 0."""
    if baseline == 0:
        return None
    return (projected - baseline) / baseline * 100.0


def _callable_name(function: Callable) -> str:
    target = getattr(function, "func", function)
    return f"{getattr(target, '__module__', '?')}.{getattr(target, '__qualname__', repr(target))}"


def _sum_metrics(metrics: Iterable[Metrics]) -> Metrics:
    total = Metrics()
    for m in metrics:
        total = total + m
    return total


def run_scenario(scenario: Scenario) -> PlanReport:
    """
    Plan a department: assortments for every capacity, bay allocation, final assortments and
    the lift report against the baseline.

    Args:
        scenario (Scenario): The validated scenario.

    Returns:
        PlanReport: Allocations, assortments, projected and baseline metrics and lifts.
    """
    from . import __version__

    started = datetime.now(timezone.utc)
    department = f"department {scenario.department_id}"
    logger.info("%s: solving assortments for %d pogs", department, len(scenario.pogs))

    def stage_one(pog: Pog) -> ValueCurve:
        try:
            return solve_curve(pog, scenario.weights)
        except BayplanError as err:
            raise add_context(err, f"{department}, pog {pog.id}")

    with ThreadPoolExecutor(max_workers=max(1, int(scenario.max_workers))) as pool:
        curves = list(pool.map(stage_one, scenario.pogs))

    specs, violations = [], {}
    for pog, curve in zip(scenario.pogs, curves):
        c = scenario.constraint(pog.id)
        try:
            value_fn = curve_from_pog(curve, scenario.units_per_bay, c.min_bays, c.max_bays, c.multiple)
            grid = feasible_grid(c.min_bays, c.max_bays, c.multiple)
            found = check_concavity(value_fn, grid)
            violations[pog.id] = len(found)
            if found:
                logger.info("%s, pog %s: bay value function not concave at %d point(s)", department, pog.id, len(found))
                if scenario.concave_repair:
                    value_fn = concave_majorant(value_fn, grid)
            specs.append(PogSpec(pog.id, c.min_bays, c.max_bays, c.multiple, value_fn))
        except BayplanError as err:
            raise add_context(err, f"{department}, pog {pog.id}")

    logger.info("%s: allocating %s bays", department, scenario.total_bays)
    try:
        problem = BayProblem(tuple(specs), scenario.total_bays)
        allocation = scenario.bay_solver(problem)
    except Infeasible as err:
        raise Infeasible(err.deficit, context=department) from err
    except BayplanError as err:
        raise add_context(err, department)

    plans = []
    for pog, curve in zip(scenario.pogs, curves):
        c = scenario.constraint(pog.id)
        bays = allocation.allocations[pog.id]
        capacity = bays_to_capacity(bays, scenario.units_per_bay)
        assortment = curve.assortment_at(capacity)
        base_bits = baseline_bits(pog)
        base_used = sum(item.space for item, bit in zip(pog.items, base_bits) if bit)
        base_capacity = bays_to_capacity(c.baseline_bays, scenario.units_per_bay)
        if base_used > base_capacity:
            logger.warning(
                "%s, pog %s: baseline assortment uses %d units but its %s baseline bays hold %d",
                department, pog.id, base_used, c.baseline_bays, base_capacity,
            )
        plans.append(PogPlan(
            pog_id=pog.id,
            allocated_bays=bays,
            capacity_units=capacity,
            assortment=tuple(pog.items[i].id for i in assortment.selected_indices()),
            objective_value=assortment.value,
            projected=evaluate_metrics(pog.items, assortment.bits),
            baseline_bays=c.baseline_bays,
            baseline_assortment=tuple(item.id for item, bit in zip(pog.items, base_bits) if bit),
            baseline=evaluate_metrics(pog.items, base_bits),
            concavity_violations=violations[pog.id],
        ))

    projected = _sum_metrics(plan.projected for plan in plans)
    baseline = _sum_metrics(plan.baseline for plan in plans)
    lift = {m: lift_percent(getattr(projected, m), getattr(baseline, m)) for m in METRICS}

    metadata = {
        "timestamps": {"started": started.isoformat(), "finished": datetime.now(timezone.utc).isoformat()},
        "solvers": {
            "bayplan": __version__,
            "numpy": np.__version__,
            "assortment": _callable_name(solve_curve),
            "bays": _callable_name(scenario.bay_solver),
        },
        "weights": scenario.weights.to_dict(),
        "inches_per_unit": scenario.unit.inches_per_unit,
        "units_per_bay": int(scenario.units_per_bay),
        "total_bays": float(scenario.total_bays),
        "concave_repair": bool(scenario.concave_repair),
        "lift_basis": LIFT_BASIS,
    }
    logger.info("%s: bay objective %.6g, sales lift %s%%", department, allocation.objective, lift["sales"])
    return PlanReport(
        department_id=scenario.department_id,
        pogs=tuple(plans),
        projected=projected,
        baseline=baseline,
        lift=lift,
        bay_objective=allocation.objective,
        slack=allocation.slack,
        metadata=metadata,
    )


def read_table(path: str, required_columns: Sequence[str]) -> pd.DataFrame:
    """
    Read a CSV file as strings with surrounding whitespace removed.

    Args:
        path (str): CSV path.
        required_columns (Sequence[str]): Columns that must be present.

    Returns:
        pd.DataFrame: Indexed by the line number of each row in the file, blank lines dropped.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, skip_blank_lines=False)
    except FileNotFoundError as err:
        raise InvalidInput(f"{path}: file not found") from err
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
        raise ParseError(str(path), [str(err).strip()]) from err

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required_columns if c not in frame.columns]
    if missing:
        raise ParseError(str(path), [f"line 1, header: missing column(s) {', '.join(missing)}"])
    frame = frame.fillna("")
    for column in frame.columns:
        frame[column] = frame[column].astype(str).str.strip()
    frame.index = pd.RangeIndex(2, len(frame) + 2, name="line")
    return frame[~(frame == "").all(axis=1)]


def _parse_number(text: str, name: str, line: int, errors: List[str], minimum: Optional[float] = None,
                  strict: bool = False) -> float:
    try:
        value = float(text)
    except ValueError:
        errors.append(f"line {line}, field {name}: '{text}' is not a number")
        return math.nan
    if not math.isfinite(value):
        errors.append(f"line {line}, field {name}: must be finite")
    elif minimum is not None and (value <= minimum if strict else value < minimum):
        relation = "positive" if strict else "non-negative"
        errors.append(f"line {line}, field {name}: must be {relation}, got {text}")
    return value


def _parse_flag(text: str, name: str, line: int, errors: List[str]) -> bool:
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered not in _FALSE:
        errors.append(f"line {line}, field {name}: '{text}' is not a boolean")
    return False


def parse_items(frame: pd.DataFrame, unit: SpaceUnit, source: str = "items") -> Dict[str, List[Item]]:
    """
    Validate item rows and group them by POG, keeping file order within a POG.

    Args:
        frame (pd.DataFrame): Rows read by `read_table`.
        unit (SpaceUnit): Discretization for the widths.
        source (str): Name used in error messages.

    Returns:
        Dict[str, List[Item]]: Items per POG id.

    Raises:
        ParseError: Listing every invalid field with its line number.
    """
    errors: List[str] = []
    grouped: Dict[str, List[Item]] = {}
    seen = set()
    for line, row in zip(frame.index, frame.to_dict("records")):
        row_errors: List[str] = []
        pog_id, item_id = row["pog_id"], row["item_id"]
        if not pog_id:
            row_errors.append(f"line {line}, field pog_id: must not be empty")
        if not item_id:
            row_errors.append(f"line {line}, field item_id: must not be empty")
        elif (pog_id, item_id) in seen:
            row_errors.append(f"line {line}, field item_id: duplicate item '{item_id}' in pog '{pog_id}'")
        seen.add((pog_id, item_id))

        width = _parse_number(row["width_inches"], "width_inches", line, row_errors, minimum=0.0, strict=True)
        price = _parse_number(row["price"], "price", line, row_errors, minimum=0.0)
        margin = _parse_number(row["margin"], "margin", line, row_errors)
        demand = _parse_number(row["demand"], "demand", line, row_errors, minimum=0.0)
        in_baseline = _parse_flag(row["in_baseline"], "in_baseline", line, row_errors)
        try:
            locality = parse_locality(row["locality"] or "Local")
        except InvalidInput as err:
            row_errors.append(f"line {line}, field locality: {err}")

        if row_errors:
            errors.extend(row_errors)
            continue
        grouped.setdefault(pog_id, []).append(Item(
            id=item_id,
            space=discretize_space(width, unit),
            price=price,
            margin=margin,
            demand=demand,
            in_baseline=in_baseline,
            locality=locality,
        ))
    if errors:
        raise ParseError(source, errors)
    return grouped


def _require(data: Mapping, key: str, source: str):
    if key not in data or data[key] is None:
        raise ConfigError(f"{source}: missing required key '{key}'")
    return data[key]


def _config_integer(value, key: str, source: str, minimum: int = 1) -> int:
    try:
        exact = as_bays(value)
    except InvalidInput as err:
        raise ConfigError(f"{source}: {key} must be an integer, got '{value}'") from err
    if exact.denominator != 1 or exact < minimum:
        raise ConfigError(f"{source}: {key} must be an integer >= {minimum}, got '{value}'")
    return int(exact)


def _config_float(value, key: str, source: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{source}: {key} must be a number, got '{value}'") from err
    if not math.isfinite(number):
        raise ConfigError(f"{source}: {key} must be finite")
    return number


def _weights_from(data: Mapping, source: str) -> WeightVector:
    weights = _require(data, "weights", source)
    if not isinstance(weights, Mapping):
        raise ConfigError(f"{source}: weights must be a mapping of sales/margin/units/similarity")
    unknown = set(weights) - {"sales", "margin", "units", "similarity"}
    if unknown:
        raise ConfigError(f"{source}: unknown weight(s) {sorted(unknown)}")
    try:
        return WeightVector(**{k: float(v) for k, v in weights.items()})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{source}: invalid weights: {err}") from err


def _constraint_from(pog_id: str, entry, source: str) -> BayConstraint:
    if not isinstance(entry, Mapping):
        raise ConfigError(f"{source}: pog '{pog_id}' must map to min_bays/max_bays/multiple/baseline_bays")
    min_bays = as_bays(_require(entry, "min_bays", f"{source}, pog {pog_id}"))
    max_bays = as_bays(_require(entry, "max_bays", f"{source}, pog {pog_id}"))
    multiple = as_bays(entry.get("multiple", 1))
    baseline = as_bays(entry.get("baseline_bays", min_bays))
    feasible_grid(min_bays, max_bays, multiple)
    return BayConstraint(pog_id, min_bays, max_bays, multiple, baseline)


def scenario_from_config(
    config: Config,
    items_frame: pd.DataFrame,
    pogs_frame: Optional[pd.DataFrame] = None,
    items_source: str = "items",
    pogs_source: str = "pogs",
) -> Scenario:
    """
    Build a Scenario from a loaded scenario config and the item (and optional POG) tables.

    Args:
        config (Config): Scenario configuration.
        items_frame (pd.DataFrame): Item rows.
        pogs_frame (pd.DataFrame, optional): POG rows; when given, every item and every
            configured POG must reference one of them.
        items_source (str): Items file name for messages.
        pogs_source (str): POGs file name for messages.

    Returns:
        Scenario: The validated scenario.
    """
    data = config.to_dict()
    source = getattr(config, "_Config__source", None) or "scenario"

    department_id = str(_require(data, "department_id", source))
    unit = SpaceUnit(_config_float(_require(data, "inches_per_unit", source), "inches_per_unit", source))
    units_per_bay = _config_integer(_require(data, "units_per_bay", source), "units_per_bay", source)
    try:
        total_bays = as_bays(_require(data, "total_bays", source))
    except InvalidInput as err:
        raise ConfigError(f"{source}: total_bays: {err}") from err
    weights = _weights_from(data, source)

    items_by_pog = parse_items(items_frame, unit, items_source)
    if pogs_frame is not None:
        known = list(dict.fromkeys(pogs_frame["pog_id"]))
        unknown_rows = [
            f"line {line}, field pog_id: unknown pog '{pog_id}'"
            for line, pog_id in items_frame["pog_id"].items()
            if pog_id and pog_id not in known
        ]
        if unknown_rows:
            raise ParseError(items_source, unknown_rows)
    else:
        known = list(items_by_pog)

    pog_entries = _require(data, "pogs", source)
    if not isinstance(pog_entries, Mapping) or not pog_entries:
        raise ConfigError(f"{source}: pogs must map pog ids to bay constraints")
    constraints = []
    for pog_id, entry in pog_entries.items():
        pog_id = str(pog_id)
        if pog_id not in known:
            where = pogs_source if pogs_frame is not None else items_source
            raise ConfigError(f"{source}: pog '{pog_id}' is not defined in {where}")
        constraints.append(_constraint_from(pog_id, entry, source))

    pogs = []
    for c in constraints:
        capacity = math.ceil(c.max_bays * units_per_bay)
        pogs.append(Pog(c.pog_id, tuple(items_by_pog.get(c.pog_id, ())), capacity, unit))
    unconstrained = sorted(set(items_by_pog) - {c.pog_id for c in constraints})
    if unconstrained:
        raise ConfigError(f"{source}: pog(s) {unconstrained} have items but no bay constraints")

    return Scenario(
        department_id=department_id,
        pogs=tuple(pogs),
        weights=weights,
        units_per_bay=units_per_bay,
        bay_constraints=tuple(constraints),
        total_bays=total_bays,
        unit=unit,
        concave_repair=bool(data.get("concave_repair", False)),
        bay_solver=resolve_target(data.get("bay_solver"), default=solve_exact),
        max_workers=_config_integer(data.get("max_workers", 4), "max_workers", source),
    )


def ingest(
    items_file: str,
    pogs_file: Optional[str],
    scenario_file: str,
    overrides: Iterable[str] = (),
) -> Scenario:
    """
    Load and validate a scenario from its files.

    Args:
        items_file (str): Items CSV.
        pogs_file (str, optional): POGs CSV, or None to take the POGs from the items file.
        scenario_file (str): Scenario YAML.
        overrides (Iterable[str]): "dotted.key=value" overrides applied on top of the YAML.

    Returns:
        Scenario: The validated scenario.
    """
    config = apply_overrides(load_config(scenario_file), overrides)
    items_frame = read_table(items_file, ITEM_COLUMNS)
    pogs_frame = read_table(pogs_file, POG_COLUMNS) if pogs_file is not None else None
    return scenario_from_config(config, items_frame, pogs_frame, str(items_file), str(pogs_file))


def write_report(report: Union[PlanReport, dict], path: str) -> None:
    document = report.to_dict() if isinstance(report, PlanReport) else report
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(document, handle, sort_keys=True, indent=2)
        handle.write("\n")


def read_report(path: str) -> dict:
    try:
        with open(path, "r") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as err:
        raise InvalidInput(f"{path}: cannot read report: {err}") from err


def load_reports(directory: str) -> List[dict]:
    """All *.json report documents in a directory, in file name order."""
    if not os.path.isdir(directory):
        raise InvalidInput(f"{directory}: not a directory")
    names = sorted(name for name in os.listdir(directory) if name.endswith(".json"))
    return [read_report(os.path.join(directory, name)) for name in names]


def _lift_of(report: Union[PlanReport, dict], metric: str) -> float:
    lifts = report.lift if isinstance(report, PlanReport) else report.get("lift_percent", {})
    value = lifts.get(metric)
    if value is None:
        department = report.department_id if isinstance(report, PlanReport) else report.get("department_id", "?")
        raise InvalidInput(f"department {department}: report has no {metric} lift")
    return float(value)


def summarize_runs(reports: Sequence[Union[PlanReport, dict]]) -> RunSummary:
    """
    Mean and sample standard deviation of the sales and margin lifts over several runs.

    Args:
        reports (Sequence[PlanReport|dict]): At least two reports or report documents.

    Returns:
        RunSummary: Per-metric mean and (n-1) standard deviation in percent.
    """
    if len(reports) < 2:
        raise InvalidInput(f"summarizing needs at least 2 reports, got {len(reports)}")
    mean, sd = {}, {}
    for metric in ("sales", "margin"):
        lifts = np.array([_lift_of(report, metric) for report in reports])
        mean[metric] = float(np.mean(lifts))
        sd[metric] = float(np.std(lifts, ddof=1))
    return RunSummary(len(reports), mean, sd)


def format_summary(summary: RunSummary) -> str:
    rows = [("Metric", "Lift (%)"), ("Sales", summary.cell("sales")), ("Margin", summary.cell("margin"))]
    return "\n".join(f"{label:<8}{value}" for label, value in rows) + f"\n({summary.runs} runs, {LIFT_BASIS})\n"


def _lift_text(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:+.2f}%"


def format_report(report: PlanReport) -> str:
    """Fixed-width table of a plan, POGs sorted by id."""
    header = f"{'pog':<16}{'bays':>7}{'base':>7}{'items':>7}{'sales':>14}{'margin':>14}{'units':>12}"
    lines = [f"department {report.department_id} ({LIFT_BASIS} lift vs baseline)", header, "-" * len(header)]
    for plan in sorted(report.pogs, key=lambda p: p.pog_id):
        lines.append(
            f"{plan.pog_id:<16}{float(plan.allocated_bays):>7g}{float(plan.baseline_bays):>7g}"
            f"{len(plan.assortment):>7d}{plan.projected.sales:>14.2f}{plan.projected.margin:>14.2f}"
            f"{plan.projected.units:>12.2f}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'projected':<37}{report.projected.sales:>14.2f}{report.projected.margin:>14.2f}{report.projected.units:>12.2f}"
    )
    lines.append(
        f"{'baseline':<37}{report.baseline.sales:>14.2f}{report.baseline.margin:>14.2f}{report.baseline.units:>12.2f}"
    )
    lines.append(
        f"{'lift':<37}{_lift_text(report.lift['sales']):>14}{_lift_text(report.lift['margin']):>14}"
        f"{_lift_text(report.lift['units']):>12}"
    )
    lines.append(f"bay objective {report.bay_objective:.6g}, unallocated {float(report.slack):g} bay(s)")
    return "\n".join(lines) + "\n"


def format_curve(curve: ValueCurve) -> str:
    """One line per capacity: units, inches, optimal value, selected item count."""
    lines = [f"pog {curve.pog_id}", f"{'units':>7}{'inches':>10}{'value':>16}{'items':>7}"]
    for capacity, (value, bits) in enumerate(curve.points()):
        lines.append(f"{capacity:>7d}{curve.unit.to_inches(capacity):>10g}{value:>16.6g}{sum(bits):>7d}")
    return "\n".join(lines) + "\n"


def format_allocation(allocation: BayAllocation) -> str:
    lines = [f"{'pog':<16}{'bays':>8}{'steps':>7}"]
    for pog_id in sorted(allocation.allocations):
        lines.append(f"{pog_id:<16}{float(allocation.allocations[pog_id]):>8g}{allocation.integer_counts[pog_id]:>7d}")
    lines.append(f"objective {allocation.objective:.6g}, unallocated {float(allocation.slack):g} bay(s)")
    return "\n".join(lines) + "\n"


def _value_fn_from(pog_id: str, entry: Mapping, source: str) -> BayValueFunction:
    has_values, has_log = "values" in entry, "log" in entry
    if has_values == has_log:
        raise ConfigError(f"{source}, pog {pog_id}: give exactly one of 'values' or 'log'")
    if has_values:
        if not isinstance(entry["values"], Mapping):
            raise ConfigError(f"{source}, pog {pog_id}: values must map bays to values")
        return BayValueFunction.tabulated(entry["values"])
    log = entry["log"]
    if not isinstance(log, Mapping):
        raise ConfigError(f"{source}, pog {pog_id}: log must have coefficients a and b")
    where = f"{source}, pog {pog_id}"
    return BayValueFunction.logarithmic(
        _config_float(_require(log, "a", where), "log.a", where), _config_float(_require(log, "b", where), "log.b", where)
    )


def load_bay_problem(path: str, overrides: Iterable[str] = ()) -> Tuple[BayProblem, Callable[[BayProblem], BayAllocation]]:
    """
    Load a standalone stage-2 problem.

    Args:
        path (str): Bay-problem YAML with total_bays, pogs and an optional bay_solver.
        overrides (Iterable[str]): "dotted.key=value" overrides.

    Returns:
        Tuple[BayProblem, Callable]: The problem and the configured solver (solve_exact by default).
    """
    config = apply_overrides(load_config(path), overrides)
    data = config.to_dict()
    source = str(path)
    pog_entries = _require(data, "pogs", source)
    if not isinstance(pog_entries, Mapping) or not pog_entries:
        raise ConfigError(f"{source}: pogs must map pog ids to constraints and value functions")
    specs = []
    for pog_id, entry in pog_entries.items():
        pog_id = str(pog_id)
        c = _constraint_from(pog_id, entry, source)
        specs.append(PogSpec(pog_id, c.min_bays, c.max_bays, c.multiple, _value_fn_from(pog_id, entry, source)))
    problem = BayProblem(tuple(specs), _require(data, "total_bays", source))
    return problem, resolve_target(data.get("bay_solver"), default=solve_exact)


def _bays_out(value: Fraction):
    return int(value) if value.denominator == 1 else str(value)


def bay_problem_to_dict(problem: BayProblem) -> dict:
    """Inverse of load_bay_problem's file layout, for writing generated problems."""
    pogs = {}
    for spec in problem.pogs:
        entry = {
            "min_bays": _bays_out(spec.min_alloc),
            "max_bays": _bays_out(spec.max_alloc),
            "multiple": _bays_out(spec.multiple),
        }
        entry.update(spec.value_fn.to_dict())
        pogs[spec.pog_id] = entry
    return {"total_bays": _bays_out(problem.total_bays), "pogs": pogs}
