"""
Two-stage retail space planning.

Stage 1 picks the assortment of every planogram (POG) by solving a 0/1 knapsack for each
possible shelf capacity. Stage 2 distributes a department's bays across its POGs as a
multiple-choice knapsack over the resulting value curves. `run_scenario` chains both and
reports projected sales, margin and units against the current plan.
"""

__version__ = "0.1.0"

from .bay_alloc import (
    BayAllocation,
    BayProblem,
    PogSpec,
    emit_standard_form,
    greedy_marginal,
    solve_brute_force_bays,
    solve_exact,
)
from .config import Config, load_config
from .core_model import Item, Locality, Metrics, Pog, SpaceUnit, WeightVector
from .curves import BayValueFunction, check_concavity, curve_from_pog, fit_log
from .errors import BayplanError, ConfigError, Infeasible, InstanceTooLarge, InvalidInput, ParseError
from .pipeline import PlanReport, Scenario, ingest, run_scenario, summarize_runs
from .pog_knapsack import KnapsackInstance, ValueCurve, solve_brute_force, solve_curve, solve_dp, solve_greedy

# Names to import with wildcard import
__all__ = [
    "BayAllocation",
    "BayProblem",
    "BayValueFunction",
    "BayplanError",
    "Config",
    "ConfigError",
    "Infeasible",
    "InstanceTooLarge",
    "InvalidInput",
    "Item",
    "KnapsackInstance",
    "Locality",
    "Metrics",
    "ParseError",
    "PlanReport",
    "Pog",
    "PogSpec",
    "Scenario",
    "SpaceUnit",
    "ValueCurve",
    "WeightVector",
    "check_concavity",
    "curve_from_pog",
    "emit_standard_form",
    "fit_log",
    "greedy_marginal",
    "ingest",
    "load_config",
    "run_scenario",
    "solve_brute_force",
    "solve_brute_force_bays",
    "solve_curve",
    "solve_dp",
    "solve_exact",
    "solve_greedy",
    "summarize_runs",
]
