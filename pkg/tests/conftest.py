"""
Shared fixtures and brute-force oracles for the folip test suite.
"""

import itertools
import os
import random
from collections import deque

import numpy as np
import pytest

from folip.parser import parse_problem
from folip.terms import Atom, Var

PROBLEMS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "problems")


def problem_path(name):
    return os.path.join(PROBLEMS_DIR, name)


def load_text(name):
    with open(problem_path(name), encoding="utf-8") as handle:
        return handle.read()


@pytest.fixture
def father_problem():
    return parse_problem(load_text("father.fol"))


@pytest.fixture
def hooker_problem():
    return parse_problem(load_text("hooker.fol"))


@pytest.fixture
def ancestor_problem():
    return parse_problem(load_text("ancestor.fol"))


# -- propositional CNF -------------------------------------------------------


def random_cnf(rng, max_atoms=12, max_clauses=30):
    """
    Random clause set over atoms a0..a{n-1}.

    Returns:
        (n, clauses, costs): clauses as (neg, pos) index tuples without tautologies
    """
    n = rng.randint(2, max_atoms)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        size = rng.randint(1, min(4, n))
        chosen = rng.sample(range(n), size)
        neg = tuple(sorted(i for i in chosen if rng.random() < 0.5))
        pos = tuple(sorted(i for i in chosen if i not in neg))
        clauses.append((neg, pos))
    costs = [round(rng.random(), 3) for _ in range(n)]
    return n, clauses, costs


def cnf_text(n, clauses, costs):
    lines = [f"type a{i}." for i in range(n)]
    lines += [f"cost a{i} = {costs[i]!r}." for i in range(n)]
    for k, (neg, pos) in enumerate(clauses):
        items = [f"!a{i}" for i in neg] + [f"a{i}" for i in pos]
        lines.append(f'clause "k{k}": {", ".join(items)}.')
    return "\n".join(lines) + "\n"


def brute_force_cnf(n, clauses, costs):
    """Minimum cost over all 2^n assignments, None when no assignment satisfies every clause."""
    best = None
    for values in itertools.product((0, 1), repeat=n):
        if all(any(values[i] == 0 for i in neg) or any(values[i] == 1 for i in pos) for neg, pos in clauses):
            cost = sum(c for c, v in zip(costs, values) if v)
            if best is None or cost < best:
                best = cost
    return best


# -- function-free first-order programs ------------------------------------------

FO_PREDICATES = {"p": 1, "q": 1, "r": 2}
FO_CONSTANTS = ("a", "b")


def _fo_literal(rng, positive, pool):
    pred = rng.choice(sorted(FO_PREDICATES))
    return positive, pred, tuple(rng.choice(pool) for _ in range(FO_PREDICATES[pred]))


def random_fo_program(rng, max_rules=4, max_facts=3):
    """
    Random function-free program over p/1, q/1, r/2 and the constants a, b.

    Rules start with one or two negative literals over X, Y, a and b; their
    positive literals only use variables bound by those. Facts are ground
    positive disjunctions.

    Returns:
        (clauses, costs): clauses as lists of (positive, pred, args); costs per ground atom
    """
    clauses = []
    for _ in range(rng.randint(1, max_rules)):
        literals = [_fo_literal(rng, False, ("X", "Y") + FO_CONSTANTS) for _ in range(rng.randint(1, 2))]
        bound = sorted({arg for _, _, args in literals for arg in args if arg[0].isupper()})
        literals += [_fo_literal(rng, True, tuple(bound) + FO_CONSTANTS) for _ in range(rng.randint(0, 2))]
        clauses.append(literals)
    for _ in range(rng.randint(1, max_facts)):
        clauses.append([_fo_literal(rng, True, FO_CONSTANTS) for _ in range(rng.randint(1, 2))])
    costs = {
        (pred, args): float(rng.randint(0, 3))
        for pred in sorted(FO_PREDICATES)
        for args in itertools.product(FO_CONSTANTS, repeat=FO_PREDICATES[pred])
    }
    return clauses, costs


def fo_text(clauses, costs):
    lines = [f"type {pred}({', '.join(['sym'] * arity)})." for pred, arity in sorted(FO_PREDICATES.items())]
    lines += [f"cost {pred}({', '.join(args)}) = {cost!r}." for (pred, args), cost in costs.items()]
    for k, literals in enumerate(clauses):
        items = [("" if positive else "!") + f"{pred}({', '.join(args)})" for positive, pred, args in literals]
        lines.append(f'clause "f{k}": {", ".join(items)}.')
    return "\n".join(lines) + "\n"


def _fo_satisfied(literals, true):
    names = sorted({arg for _, _, args in literals for arg in args if arg[0].isupper()})
    for values in itertools.product(FO_CONSTANTS, repeat=len(names)):
        s = dict(zip(names, values))
        if not any(((pred, tuple(s.get(a, a) for a in args)) in true) == positive
                   for positive, pred, args in literals):
            return False
    return True


def brute_force_fo(clauses, costs):
    """
    Minimum model cost over every subset of the ground atoms, None when no
    subset satisfies every clause. Atoms over other constants can stay false.
    """
    atoms = list(costs)
    best = None
    for values in itertools.product((False, True), repeat=len(atoms)):
        true = {atom for atom, value in zip(atoms, values) if value}
        if all(_fo_satisfied(literals, true) for literals in clauses):
            cost = sum(costs[atom] for atom in true)
            if best is None or cost < best:
                best = cost
    return best


# -- bounded LPs ---------------------------------------------------------------


def random_lp(rng, max_cols=5, max_rows=6):
    """
    Random feasible LP min c.x, A x >= b, l <= x <= u with c >= 0 and bounds in [0, 1].

    Returns:
        (A, b, c, lower, upper) as numpy arrays
    """
    n = rng.randint(1, max_cols)
    m = rng.randint(1, max_rows)
    A = np.array([[rng.choice((-2, -1, 0, 0, 1, 1, 2)) for _ in range(n)] for _ in range(m)], dtype=float)
    lower = np.array([rng.choice((0.0, 0.0, 0.5)) for _ in range(n)])
    upper = np.array([rng.choice((1.0, 1.0, lo + 0.5)) for lo in lower])
    upper = np.maximum(upper, lower)
    point = np.array([rng.uniform(lo, hi) for lo, hi in zip(lower, upper)])
    slack = np.array([rng.choice((0.0, 0.0, 0.3)) for _ in range(m)])
    b = np.floor((A @ point - slack) * 1000) / 1000
    c = np.array([round(rng.uniform(0.0, 3.0), 2) for _ in range(n)])
    return A, b, c, lower, upper


def vertex_enumeration(A, b, c, lower, upper, tol=1e-9):
    """
    Minimum of c.x over the polytope by enumerating its vertices.

    Every column is either at a bound or free; the free ones are pinned down
    by as many tight rows.

    Returns:
        float, or None when the polytope is empty
    """
    m, n = A.shape
    best = None
    for states in itertools.product((0, 1, 2), repeat=n):
        free = [j for j in range(n) if states[j] == 2]
        fixed = np.array([lower[j] if states[j] == 0 else upper[j] if states[j] == 1 else 0.0 for j in range(n)])
        for rows in itertools.combinations(range(m), len(free)):
            x = fixed.copy()
            if free:
                sub = A[np.ix_(rows, free)]
                if abs(np.linalg.det(sub)) < 1e-9:
                    continue
                x[free] = np.linalg.solve(sub, b[list(rows)] - A[list(rows)] @ fixed)
            if np.any(x < lower - tol) or np.any(x > upper + tol):
                continue
            if np.any(A @ x < b - 1e-7):
                continue
            value = float(c @ x)
            if best is None or value < best:
                best = value
    return best


# -- definite programs and the maze -------------------------------------------


def forward_chain(facts, rules):
    """
    Least model of a definite program.

    Args:
        facts: iterable of ground tuples
        rules: functions mapping the current set to newly derived tuples
    """
    model = set(facts)
    while True:
        derived = set()
        for rule in rules:
            derived |= set(rule(model)) - model
        if not derived:
            return model
        model |= derived


def maze_steps(goal, blocked_right, inside=lambda x, y: True, horizon=40):
    """
    Breadth-first search over the time-expanded grid.

    Args:
        goal: predicate on (x, y)
        blocked_right: predicate on the time I at which a move to x+1 is forbidden
        inside: predicate on the squares the route may use
        horizon: maximum number of steps explored

    Returns:
        int: fewest moves from (0, 0) at time 0 into the goal region, or None
    """
    start = (0, 0, 0)
    queue = deque([start])
    seen = {start}
    while queue:
        t, x, y = queue.popleft()
        if goal(x, y):
            return t
        if t >= horizon:
            continue
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if dx == 1 and blocked_right(t):
                continue
            if not inside(x + dx, y + dy):
                continue
            state = (t + 1, x + dx, y + dy)
            # the time only matters through the wall period
            key = ((t + 1) % 3, x + dx, y + dy)
            if key in seen:
                continue
            seen.add(key)
            queue.append(state)
    return None


# -- Markov logic networks -----------------------------------------------------


def random_mln(rng):
    """
    Random small MLN text with query predicates p/1, q/1 (and r/2 on two constants)
    and an evidence predicate e/1.
    """
    size = rng.choice((2, 3))
    constants = ["a", "b", "c"][:size]
    predicates = [("p", 1), ("q", 1), ("e", 1)]
    if size == 2:
        predicates.append(("r", 2))
    lines = [f"thing = {{{', '.join(constants)}}}"]
    lines += ["predicate p(thing)", "predicate q(thing)", "evidence e(thing)"]
    if size == 2:
        lines.append("predicate r(thing, thing)")
    for constant in constants:
        if rng.random() < 0.5:
            lines.append(f"e({constant})")
    variables = ["X", "Y"]
    hard_done = False
    for _ in range(rng.randint(1, 5)):
        literals = []
        for _ in range(rng.randint(1, 3)):
            name, arity = rng.choice(predicates)
            args = ", ".join(rng.choice(variables + constants[:1]) for _ in range(arity))
            sign = "!" if rng.random() < 0.5 else ""
            literals.append(f"{sign}{name}({args})")
        query = [lit for lit in literals if not lit.lstrip("!").startswith("e(")]
        if not hard_done and len(query) >= 2 and rng.random() < 0.3:
            lines.append("HARD: " + " v ".join(query))
            hard_done = True
        else:
            weight = round(rng.uniform(0.05, 2.0), 2)
            lines.append(f"{weight}: " + " v ".join(literals))
    return "\n".join(lines) + "\n"


def _clause_groundings(program, clause):
    types = program.var_types(clause)
    names = clause.variables()
    domains = [program.domains.get(types[name], []) for name in names]
    for values in itertools.product(*domains):
        yield dict(zip(names, values))


def _ground(atom, theta):
    return Atom(atom.pred, tuple(theta[a.name] if isinstance(a, Var) else a for a in atom.args))


def mln_falsification_oracle(program):
    """
    Minimum total weight of falsified soft groundings over all worlds that
    satisfy every hard grounding; None when no such world exists.
    """
    query_atoms = []
    for predicate in program.query_predicates:
        domains = [program.domains.get(t, []) for t in predicate.types]
        for args in itertools.product(*domains):
            query_atoms.append(Atom(predicate.name, tuple(args)))
    grounded = []
    for clause in program.clauses:
        for theta in _clause_groundings(program, clause):
            grounded.append((clause.weight, [(lit.positive, _ground(lit.atom, theta)) for lit in clause.literals]))

    best = None
    for values in itertools.product((False, True), repeat=len(query_atoms)):
        world = dict(zip(query_atoms, values))

        def truth(atom):
            if atom in world:
                return world[atom]
            return program.holds(atom)

        cost = 0.0
        feasible = True
        for weight, literals in grounded:
            if any(truth(atom) == positive for positive, atom in literals):
                continue
            if weight is None:
                feasible = False
                break
            cost += weight
        if feasible and (best is None or cost < best):
            best = cost
    return best


@pytest.fixture
def rng():
    return random.Random(20240611)
