import math
import os
from fractions import Fraction

import pytest

from bayplan.bay_alloc import (
    BayProblem,
    PogSpec,
    build_piecewise,
    emit_standard_form,
    greedy_marginal,
    solve_brute_force_bays,
    solve_exact,
)
from bayplan.curves import BayValueFunction
from bayplan.errors import ConcavityRequired, Infeasible, InstanceTooLarge, InvalidInput
from bayplan.synthetic import random_bay_problem, random_log_bay_problem


def tabulated(min_alloc, max_alloc, values, pog_id="P", multiple=1):
    return PogSpec(pog_id, min_alloc, max_alloc, multiple, BayValueFunction.tabulated(values))


@pytest.fixture
def two_pog_problem():
    return BayProblem(
        (
            tabulated(2, 4, {2: 10, 3: 14, 4: 16}, "A"),
            tabulated(1, 3, {1: 6, 2: 11, 3: 13}, "B"),
        ),
        5,
    )


def test_pog_spec_invariants():
    with pytest.raises(InvalidInput):
        tabulated(3, 2, {2: 1, 3: 1})
    with pytest.raises(InvalidInput):
        tabulated(0, 1, {0: 0, 1: 1}, multiple=Fraction(2, 3))
    with pytest.raises(InvalidInput):
        tabulated(Fraction(1, 2), Fraction(5, 2), {Fraction(1, 2): 0, Fraction(5, 2): 1}, multiple=2)
    with pytest.raises(InvalidInput):
        tabulated(-1, 1, {-1: 0, 1: 1})


def test_bay_problem_validation():
    with pytest.raises(InvalidInput):
        BayProblem((), 3)
    with pytest.raises(InvalidInput):
        BayProblem((tabulated(1, 2, {1: 1, 2: 2}), tabulated(1, 2, {1: 1, 2: 2})), 3)
    with pytest.raises(InvalidInput):
        BayProblem((tabulated(1, 2, {1: 1, 2: 2}),), -1)


def test_base_unit():
    half = tabulated(0, 2, {0: 0, 2: 2}, "H", multiple=Fraction(1, 2))
    whole = tabulated(0, 2, {0: 0, 2: 2}, "W")
    assert BayProblem((half, whole), Fraction(7, 2)).base_unit == Fraction(1, 2)
    assert BayProblem((whole,), Fraction(10, 3)).base_unit == Fraction(1, 3)
    assert BayProblem((whole,), Fraction(10, 3)).grid_budget == 10


def test_pogs_sorted_by_id():
    problem = BayProblem((tabulated(1, 1, {1: 1}, "b"), tabulated(1, 1, {1: 1}, "a")), 2)
    assert [spec.pog_id for spec in problem.pogs] == ["a", "b"]


def test_build_piecewise_breakpoints():
    model = build_piecewise(tabulated(2, 4, {2: 10, 3: 14, 4: 16}))
    assert model.breakpoints == (2, 3, 4)
    assert model.values == (10.0, 14.0, 16.0)
    assert model.convex_weights(3) == (0.0, 1.0, 0.0)
    weights = model.convex_weights(Fraction(5, 2))
    assert sum(w * float(j) for w, j in zip(weights, model.breakpoints)) == 2.5
    assert sum(weights) == 1.0


def test_build_piecewise_single_breakpoint():
    model = build_piecewise(tabulated(3, 3, {3: 7}))
    assert model.breakpoints == (3,)
    assert model.convex_weights(3) == (1.0,)


def test_build_piecewise_interpolates_log_between_integers():
    spec = PogSpec("L", 1, 3, Fraction(1, 2), BayValueFunction.logarithmic(0, 1))
    model = build_piecewise(spec)
    assert model.breakpoints == (1, 2, 3)
    assert model.evaluate(Fraction(3, 2)) == pytest.approx(math.log(2) / 2)


def test_fractional_bounds_become_breakpoints():
    spec = tabulated(Fraction(1, 2), Fraction(5, 2), {Fraction(1, 2): 1, 1: 2, 2: 3, Fraction(5, 2): 4}, multiple=Fraction(1, 2))
    assert build_piecewise(spec).breakpoints == (Fraction(1, 2), 1, 2, Fraction(5, 2))


def test_undefined_breakpoint_is_invalid_input():
    spec = PogSpec("L", 1, Fraction(3, 2), Fraction(1, 2), BayValueFunction.tabulated({1: 0, Fraction(3, 2): 1}))
    assert build_piecewise(spec).breakpoints == (1, Fraction(3, 2))
    with pytest.raises(InvalidInput):
        build_piecewise(PogSpec("L", 1, 2, 1, BayValueFunction.tabulated({1: 0, Fraction(3, 2): 1})))


def test_tabulated_half_bay_values_take_precedence():
    spec = tabulated(1, 2, {1: 0, Fraction(3, 2): 9, 2: 10}, multiple=Fraction(1, 2))
    problem = BayProblem((spec,), Fraction(3, 2))
    assert problem.choices(0) == [(1, 2, 0.0), (Fraction(3, 2), 3, 9.0), (2, 4, 10.0)]
    assert build_piecewise(spec).evaluate(Fraction(3, 2)) == 5.0
    assert solve_exact(problem).objective == 9.0


def test_solve_exact_two_pog_example(two_pog_problem):
    allocation = solve_exact(two_pog_problem)
    assert allocation.allocations == {"A": 3, "B": 2}
    assert allocation.integer_counts == {"A": 3, "B": 2}
    assert allocation.objective == 25.0
    assert allocation.slack == 0


def test_solve_exact_budget_equals_minimums():
    problem = BayProblem((tabulated(2, 4, {2: 10, 3: 14, 4: 16}, "A"), tabulated(1, 3, {1: 6, 2: 11, 3: 13}, "B")), 3)
    allocation = solve_exact(problem)
    assert allocation.allocations == {"A": 2, "B": 1}
    assert allocation.objective == 16.0


def test_solve_exact_half_bays():
    spec = tabulated(0, 4, {0: 0, 4: 4}, multiple=Fraction(1, 2))
    allocation = solve_exact(BayProblem((spec,), 3))
    assert allocation.allocations == {"P": 3}
    assert allocation.integer_counts == {"P": 6}
    assert allocation.objective == 3.0


def test_solve_exact_prefers_fewer_bays_on_ties():
    allocation = solve_exact(BayProblem((tabulated(1, 3, {1: 5, 2: 8, 3: 8}),), 3))
    assert allocation.allocations == {"P": 2}
    assert allocation.slack == 1


def test_infeasible_reports_deficit(two_pog_problem):
    problem = BayProblem(two_pog_problem.pogs, 2)
    for solver in (solve_exact, solve_brute_force_bays, greedy_marginal):
        with pytest.raises(Infeasible, match="by 1 bay") as caught:
            solver(problem)
        assert caught.value.deficit == 1


def test_brute_force_two_pog_example_and_guard(two_pog_problem):
    allocation = solve_brute_force_bays(two_pog_problem)
    assert allocation.allocations == {"A": 3, "B": 2}
    assert allocation.objective == 25.0
    single = solve_brute_force_bays(BayProblem((tabulated(1, 3, {1: 4, 2: 9, 3: 7}),), 3))
    assert single.allocations == {"P": 2}
    wide = tuple(tabulated(0, 99, {0: 0, 99: 99}, f"p{k}") for k in range(4))
    with pytest.raises(InstanceTooLarge):
        solve_brute_force_bays(BayProblem(wide, 10))


def test_greedy_two_pog_example(two_pog_problem):
    allocation = greedy_marginal(two_pog_problem)
    assert allocation.allocations == {"A": 3, "B": 2}
    assert allocation.objective == 25.0


def test_greedy_zero_slack_and_single_pog():
    problem = BayProblem((tabulated(2, 4, {2: 10, 3: 14, 4: 16}, "A"),), 2)
    assert greedy_marginal(problem).allocations == {"A": 2}
    saturating = BayProblem((tabulated(0, 3, {0: 0, 1: 5, 2: 8, 3: 8}),), 10)
    assert greedy_marginal(saturating).allocations == {"P": 2}


def test_greedy_requires_concavity():
    problem = BayProblem((tabulated(0, 2, {0: 0, 1: 1, 2: 3}),), 2)
    with pytest.raises(ConcavityRequired):
        greedy_marginal(problem)


def test_emit_standard_form_matches_golden(golden_dir):
    problem = BayProblem((tabulated(2, 4, {2: 10, 3: 14, 4: 16}),), 4)
    with open(os.path.join(golden_dir, "single_pog_standard_form.lp")) as handle:
        assert emit_standard_form(problem) == handle.read()


def test_emit_standard_form_two_pogs(two_pog_problem):
    text = emit_standard_form(two_pog_problem)
    lines = text.splitlines()
    columns = {token for line in lines if line.startswith(("+", "-")) for token in line.split()[1:]}
    assert len({c for c in columns if c.startswith("lam_")}) == 6
    assert lines[lines.index("general") + 1 : lines.index("end")] == ["  x_0", "  x_1"]
    assert sum(line.startswith("c_u_budget_") for line in lines) == 1
    assert sum(line.startswith("c_e_z") for line in lines) == 4
    assert "<= 5" in lines


def test_oracle_equivalence(rng):
    for _ in range(500):
        problem = random_bay_problem(rng, max_pogs=4, max_choices=12)
        exact, brute = solve_exact(problem), solve_brute_force_bays(problem)
        assert exact.objective == brute.objective
        assert exact.allocations == brute.allocations
        assert sum(exact.allocations.values()) <= problem.total_bays
        for spec in problem.pogs:
            y = exact.allocations[spec.pog_id]
            assert spec.min_alloc <= y <= spec.max_alloc
            assert exact.integer_counts[spec.pog_id] * spec.multiple == y


def test_greedy_matches_exact_on_concave_tables(rng):
    for _ in range(200):
        problem = random_bay_problem(rng, max_pogs=4, max_choices=8, concave=True)
        if len({spec.multiple for spec in problem.pogs}) > 1:
            continue
        assert greedy_marginal(problem).objective == solve_exact(problem).objective


def test_greedy_matches_exact_on_logarithmic_functions(rng):
    for _ in range(200):
        problem = random_log_bay_problem(rng)
        greedy, exact = greedy_marginal(problem), solve_exact(problem)
        assert greedy.objective == pytest.approx(exact.objective, rel=1e-12)
        # strictly increasing values use every bay they can
        capacity = sum(spec.max_alloc for spec in problem.pogs)
        assert sum(exact.allocations.values()) == min(problem.total_bays, capacity)


def test_objective_monotone_in_budget(rng):
    for _ in range(50):
        problem = random_bay_problem(rng, max_pogs=3, max_choices=6)
        low = sum(spec.min_alloc for spec in problem.pogs)
        objectives = [
            solve_exact(BayProblem(problem.pogs, low + Fraction(k, 2))).objective for k in range(8)
        ]
        assert objectives == sorted(objectives)


def test_solve_exact_deterministic(rng):
    problem = random_bay_problem(rng)
    assert solve_exact(problem) == solve_exact(problem)
