"""
End-to-end runs of the bundled problems against independent oracles.
"""

import random

import pytest

from conftest import (
    brute_force_cnf,
    brute_force_fo,
    cnf_text,
    fo_text,
    forward_chain,
    load_text,
    maze_steps,
    random_cnf,
    random_fo_program,
)
from folip.parser import parse_problem
from folip.separation import check_model
from folip.solver import INFEASIBLE, OPTIMAL, solve


def test_definite_program_optimum_is_the_least_model(ancestor_problem):
    def base(model):
        return {("anc", x, y) for p, x, y in model if p == "parent"}

    def step(model):
        return {
            ("anc", x, z)
            for p, x, y in model if p == "parent"
            for q, y2, z in model if q == "anc" and y2 == y
        }

    least = forward_chain({("parent", "ann", "bob"), ("parent", "bob", "cid")}, [base, step])
    result = solve(ancestor_problem)
    assert result.status == OPTIMAL
    assert {str(atom) for atom in result.model} == {f"{p}({x},{y})" for p, x, y in least}
    assert result.objective == pytest.approx(3.0)


def test_hooker_bound_and_optimum(hooker_problem):
    result = solve(hooker_problem)
    assert result.stats.root_bound == pytest.approx(5 / 3, abs=1e-6)
    assert result.objective == pytest.approx(2.0, abs=1e-6)


def test_contradiction_has_no_model():
    assert solve(parse_problem(load_text("contradiction.fol"))).status == INFEASIBLE


def test_maze_route_matches_breadth_first_search():
    expected = maze_steps(
        lambda x, y: x > 1 and y > 4,
        lambda t: t % 3 == 0,
        inside=lambda x, y: 0 <= x <= 2 and 0 <= y <= 5,
        horizon=9,
    )
    assert expected == 7
    problem = parse_problem(load_text("maze.fol"))
    result = solve(problem, time_limit=60.0, minimal_model=True)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(expected, abs=1e-6)
    assert check_model(problem, result.model) is None
    assert result.stats.columns_created > 0


@pytest.mark.parametrize("seed", range(25))
def test_random_clause_sets_match_brute_force(seed):
    n, clauses, costs = random_cnf(random.Random(seed))
    expected = brute_force_cnf(n, clauses, costs)
    result = solve(parse_problem(cnf_text(n, clauses, costs)))
    if expected is None:
        assert result.status == INFEASIBLE
        return
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("seed", range(30))
def test_random_first_order_programs_match_brute_force(seed):
    clauses, costs = random_fo_program(random.Random(seed))
    text = fo_text(clauses, costs)
    problem = parse_problem(text)
    expected = brute_force_fo(clauses, costs)
    result = solve(problem)
    if expected is None:
        assert result.status == INFEASIBLE, text
        return
    assert result.status == OPTIMAL, text
    assert result.objective == pytest.approx(expected, abs=1e-6), text
    assert check_model(problem, result.model) is None
